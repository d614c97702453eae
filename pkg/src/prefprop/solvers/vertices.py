"""Brute-force vertex enumeration of small polytopes."""

from __future__ import annotations

import itertools
from math import comb

import numpy as np

from ..problem import ScalarizedProblem
from .base import inequality_rows


def count_candidate_bases(sp: ScalarizedProblem) -> int:
    G, _, _ = inequality_rows(sp)
    free = sp.n - len(sp.b_eq)
    return comb(G.shape[0], free) if free >= 0 else 0


def enumerate_vertices(sp: ScalarizedProblem, tol: float = 1e-9, chunk: int = 20000) -> np.ndarray:
    """Every vertex of ``{x : G x <= h, E x = e}``, one per row, deduplicated.

    Each choice of ``n - q`` inequality rows (together with the equalities) that
    forms a nonsingular system is solved; feasible solutions are kept.
    """
    G, h, _ = inequality_rows(sp)
    E, e = sp.A_eq, sp.b_eq
    n = sp.n
    k = n - len(e)
    if k < 0:
        raise ValueError("more equality rows than variables")
    found = []
    combos = itertools.combinations(range(G.shape[0]), k)
    while True:
        batch = np.array(list(itertools.islice(combos, chunk)), dtype=int).reshape(-1, k)
        if batch.shape[0] == 0:
            break
        Ms = np.concatenate([np.broadcast_to(E, (len(batch),) + E.shape), G[batch]], axis=1)
        rhs = np.concatenate([np.broadcast_to(e, (len(batch), len(e))), h[batch]], axis=1)
        dets = np.abs(np.linalg.det(Ms))
        good = dets > 1e-10
        if not np.any(good):
            continue
        X = np.linalg.solve(Ms[good], rhs[good][..., None])[..., 0]
        viol = np.max(X @ G.T - h, axis=1, initial=0.0)
        if len(e):
            viol = np.maximum(viol, np.max(np.abs(X @ E.T - e), axis=1))
        found.append(X[viol <= tol * (1.0 + np.max(np.abs(h), initial=0.0))])
    if not found:
        return np.zeros((0, n))
    V = np.vstack(found)
    if len(V) == 0:
        return V
    _, keep = np.unique(np.round(V, 9), axis=0, return_index=True)
    return V[np.sort(keep)]


def vertex_minimum(sp: ScalarizedProblem, vertices: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Minimum of the LP cost over enumerated vertices (bounded LPs only)."""
    V = enumerate_vertices(sp) if vertices is None else vertices
    vals = V @ sp.linear_cost + sp.constant
    i = int(np.argmin(vals))
    return float(vals[i]), V[i]
