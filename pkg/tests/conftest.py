import math

import pytest

from elastic_te import elastic2d
from elastic_te.params import LameParameters

# Disk sweep used throughout: lam = mu = rho = 1, rho~ = 20.
TABLE_PARAMS = LameParameters(lam=1.0, mu=1.0, rho=1.0, rho_tilde=20.0)
TABLE_ORDERS = (4, 8, 13, 17, 22, 27, 34, 42)


@pytest.fixture(scope="session")
def table_params():
    return TABLE_PARAMS


@pytest.fixture(scope="session")
def bi_mode_8():
    return elastic2d.compute_mode(8, TABLE_PARAMS, "bi")


@pytest.fixture(scope="session")
def mono_mode_20():
    return elastic2d.compute_mode(20, TABLE_PARAMS, "mono")


def ascending_series_j(m, x, terms=80):
    """Reference J_m(x) from the power series in plain floats (small x only)."""
    total = 0.0
    for k in range(terms):
        total += (-1) ** k * (x / 2) ** (2 * k + m) / (math.factorial(k) * math.factorial(k + m))
    return total


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def record_criterion(request):
    """Store and print one summary line for an acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
