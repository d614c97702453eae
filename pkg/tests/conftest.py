import pytest

from prefprop.preferences import isotropic_tmvn
from prefprop.problem import builtin_problem
from prefprop.propagate import propagate


@pytest.fixture(scope="session")
def case1():
    return builtin_problem("case1_ackermann")


@pytest.fixture(scope="session")
def case2():
    return builtin_problem("case2_pivot_skid")


@pytest.fixture(scope="session")
def case1_run(case1):
    return propagate(case1, isotropic_tmvn([1.0] * 4, 0.5), 1000, master_seed=7)


@pytest.fixture(scope="session")
def case2_run(case2):
    return propagate(case2, isotropic_tmvn([1.0] * 4, 0.5), 1000, master_seed=7)


_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record_criterion():
    def record(k: int, passed: bool, detail: str):
        _ACCEPTANCE[k] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if passed else 'FAIL'}  {detail}")
