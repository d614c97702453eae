import json

import pytest

from prefprop.cli import main
from prefprop.problem import builtin_problem
from prefprop.problem_io import dump_problem
from prefprop.reporting import expected_header, read_csv, validate_csv

ALL = "discrete,correlations,histograms,sensitivity,frechet,pareto,overlay"


def run(args, capsys=None):
    return main(args, quiet=True)


def test_run_case1_writes_five_point_support(tmp_path):
    assert run(["run", "--problem", "case1_ackermann", "--n", "1000", "--seed", "7", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "discrete_summary.csv")
    assert len(rows) == 5
    _, samples = read_csv(tmp_path / "samples.csv")
    assert len(samples) == 1000
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert set(manifest["files"]) == {"samples.csv", "discrete_summary.csv", "correlations.csv", "histograms.csv"}
    assert any("lower variable bounds" in n for n in manifest["notes"])
    assert manifest["config"]["distribution"]["type"] == "tmvn"


def test_run_scenario_file(tmp_path):
    code = run(
        ["run", "--problem", "case1_ackermann", "--analyses", "frechet", "--scenario-file", "tables23.cfg", "--n", "100", "--out", str(tmp_path)]
    )
    assert code == 0
    _, rows = read_csv(tmp_path / "frechet.csv")
    assert [r[0] for r in rows] == ["baseline", "low_uncertainty", "high_uncertainty", "objective3_emphasized", "objective4_emphasized"]


def test_config_errors(tmp_path, capsys):
    assert run(["run", "--problem", "toy_continuous", "--n", "0", "--out", str(tmp_path)]) == 2
    assert run(["run", "--problem", "nope", "--out", str(tmp_path)]) == 2
    assert run(["run", "--analyses", "plots", "--out", str(tmp_path)]) == 2
    assert run(["run", "--dist", '{"type": "tmvn", "mu": [1, 1]}', "--out", str(tmp_path)]) == 2
    bad = tmp_path / "cfg.json"
    bad.write_text('{\n  "n": 10,\n  "seeed": 3\n}')
    assert run(["run", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "seeed" in capsys.readouterr().err
    bad.write_text('{\n  "n": 10,\n  oops\n}')
    assert run(["run", "--config", str(bad)]) == 2
    assert "line 3" in capsys.readouterr().err
    assert run(["run", "--scenario-file", "missing.cfg", "--analyses", "frechet", "--out", str(tmp_path)]) == 2
    assert run(["bogus"]) == 2


def test_analysis_failure_exit_code(tmp_path):
    dist = '{"type": "tmvn", "mu": [-6, -6, -6, -6], "sigma": 0.5}'
    assert run(["run", "--dist", dist, "--n", "5", "--out", str(tmp_path)]) == 1


def test_env_default_out(tmp_path, monkeypatch):
    monkeypatch.setenv("PREFPROP_OUT", str(tmp_path / "envout"))
    assert run(["run", "--problem", "toy_continuous", "--n", "20", "--dist", '{"type":"dirichlet","alpha":[1,1]}']) == 0
    assert (tmp_path / "envout" / "samples.csv").exists()


def test_problem_file_and_config(tmp_path):
    pfile = tmp_path / "p.json"
    dump_problem(builtin_problem("case1_ackermann"), pfile)
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"problem": str(pfile), "n": 50, "seed": 2, "analyses": ["discrete"]}))
    assert run(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "discrete_summary.csv").exists()


def test_all_outputs_schema_valid(tmp_path):
    args = ["run", "--problem", "case2_pivot_skid", "--n", "600", "--seed", "1", "--analyses", ALL, "--pareto-n", "1000", "--sobol-n", "256"]
    assert run(args + ["--out", str(tmp_path)]) == 0
    p = builtin_problem("case2_pivot_skid")
    files = sorted(tmp_path.glob("*.csv"))
    assert len(files) == 8
    for f in files:
        assert validate_csv(f, expected_header(f.name, p.m, p.design_names, p.objective_names)) == []
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert "sensitivity_meta.json" in manifest["files"]


def test_verify_and_misconfiguration(capsys):
    assert run(["verify", "--only", "frechet,lp"]) == 0
    assert run(["verify", "--only", "lp", "--solver-tol", "1e-2"]) == 1
    assert run(["verify", "--only", "nothing"]) == 2


def test_verify_prints_table(capsys):
    assert main(["verify", "--only", "frechet"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 3 and "3/3 checks passed" in out


def test_demo(tmp_path):
    assert run(["demo", "--n", "2000", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "demo_discrete.csv")
    assert len(rows) == 3
    for r in rows:
        p, emp = float(r[4]), float(r[5])
        assert abs(p - emp) <= 3 * (p * (1 - p) / 2000) ** 0.5 + 1e-12
    _, curve = read_csv(tmp_path / "demo_continuous_curve.csv")
    assert len(curve) == 5 * 201
    assert run(["demo", "--n", "0", "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("problem", ["case1_ackermann", "toy_discrete"])
def test_repeat_run_identical(tmp_path, problem):
    args = ["run", "--problem", problem, "--n", "200", "--seed", "11"]
    if problem == "toy_discrete":
        args += ["--dist", '{"type":"mvn","mu":[1,1],"sigma":1}']
    assert run(args + ["--out", str(tmp_path / "a")]) == 0
    assert run(args + ["--out", str(tmp_path / "b")]) == 0
    for f in (tmp_path / "a").glob("*.csv"):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()
