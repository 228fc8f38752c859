import numpy as np
import pytest

from magweyl.grid import PhaseGrid
from magweyl.magnetic import MagneticData

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, label: str, value: float, tol: float, ok: bool, note: str = "") -> bool:
    """Remember one acceptance line; printed now and again in the terminal summary."""
    line = f"criterion {criterion:2d} {'PASS' if ok else 'FAIL'}  {label}: {value:.3e} (tol {tol:.1e})"
    if note:
        line += f"  [{note}]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid1():
    return PhaseGrid.balanced(1, 32)


@pytest.fixture
def grid2():
    return PhaseGrid.balanced(2, 12)


@pytest.fixture
def zero1():
    return MagneticData.zero(1)


@pytest.fixture
def const2():
    return MagneticData.constant(0.5, lam=0.5)
