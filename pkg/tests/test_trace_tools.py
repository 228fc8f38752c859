import numpy as np
import pytest

from magweyl.grid import PhaseGrid
from magweyl.magnetic import MagneticData
from magweyl.quantizer import quantize
from magweyl.symbol import Symbol
from magweyl.trace_tools import (abs_power, local_trace_check, phase_space_trace, schatten_norm,
                                 trace_formula_check)


def test_phase_space_trace_of_gaussian():
    # (2 pi eps)^-1 int exp(-(x^2 + xi^2)/2) = 1 / eps
    g = PhaseGrid.balanced(1, 32)
    assert np.isclose(phase_space_trace(Symbol.gaussian(g), 0.5), 2.0, rtol=1e-12)


def test_trace_formula_matrix_valued_magnetic(const2):
    f = Symbol.gaussian(PhaseGrid.balanced(2, 12), matrix=[[1, 0.5j], [-0.5j, 2]])
    assert trace_formula_check(f, const2).defect < 1e-6


def test_trace_needs_square_fiber(grid1, zero1):
    with pytest.raises(ValueError):
        trace_formula_check(Symbol.gaussian(grid1, matrix=np.ones((1, 2))), zero1)


def test_schatten_norms(rng):
    M = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    assert np.isclose(schatten_norm(M, 2), np.linalg.norm(M))
    assert np.isclose(schatten_norm(M, np.inf), np.linalg.norm(M, 2))
    assert np.isclose(schatten_norm(M, 1), np.linalg.norm(M, "nuc"))
    with pytest.raises(ValueError):
        schatten_norm(M, 0.5)


def test_abs_power(rng):
    M = rng.normal(size=(6, 6))
    A = abs_power(M, 2)
    assert np.allclose(A, M.T @ M)


def test_local_trace_of_gaussian_is_bounded_by_the_trace_norm():
    g = PhaseGrid.balanced(1, 32)
    mag = MagneticData.zero(1)
    f = Symbol.gaussian(g)
    one = Symbol.identity(g)
    full = local_trace_check(f, one, 1.0, mag)
    assert np.isclose(full, schatten_norm(quantize(f, mag), 1.0))
    chi = Symbol.scalar(g, lambda x, xi: np.exp(-x[..., 0] ** 2))
    assert local_trace_check(f, chi, 1.0, mag) < full
