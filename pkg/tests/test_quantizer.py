import numpy as np
import pytest

from magweyl.grid import PhaseGrid
from magweyl.magnetic import MagneticData
from magweyl.quantizer import (OperatorMatrix, adjoint_check, commutation_check, dequantize,
                               gaussian_state, kernel_map, momentum_commutator, operator_norm,
                               position_commutator, quantize, weyl_composition_defect,
                               weyl_system_apply, wigner)
from magweyl.symbol import Symbol


def test_identity_symbol_gives_identity(grid1, zero1):
    M = quantize(Symbol.identity(grid1), zero1).M
    assert np.allclose(M * grid1.dx, np.eye(grid1.n), atol=1e-12) or np.allclose(M, np.eye(grid1.n))


def test_position_symbol_is_multiplication(grid1, zero1):
    v = Symbol.scalar(grid1, lambda x, xi: np.exp(-x[..., 0] ** 2))
    assert np.abs(quantize(v, zero1).M - np.diag(np.exp(-grid1.x_nodes ** 2))).max() < 1e-12


@pytest.mark.parametrize("eps", [1.0, 0.5])
def test_round_trip_random_values(rng, eps):
    g = PhaseGrid.balanced(1, 16)
    mag = MagneticData.zero(1, eps)
    f = Symbol(g, rng.normal(size=g.shape + (2, 2)) + 1j * rng.normal(size=g.shape + (2, 2)))
    assert wigner(kernel_map(f, mag), mag).distance(f) < 1e-10


def test_round_trip_magnetic_d2(grid2, const2):
    # sampled values round-trip exactly; the exact callable only up to the box edge
    f = Symbol.gaussian(grid2).without_func()
    assert wigner(kernel_map(f, const2), const2).distance(f) < 1e-12
    g = Symbol.gaussian(PhaseGrid.balanced(2, 24))
    assert wigner(kernel_map(g, const2), const2).distance(g) < 1e-6


def test_dequantize_then_quantize_operator(rng, zero1):
    g = PhaseGrid.balanced(1, 16)
    M = rng.normal(size=(16, 16)) + 0j
    F = OperatorMatrix(g, 1.0, 1, 1, M)
    assert np.abs(quantize(dequantize(F, zero1), zero1).M - M).max() < 1e-10


def test_adjoint_real_symbol_hermitian(const2):
    # the residual is the Gaussian's size at the box edge: 4e-5 at n=16, 3e-7 at n=24
    grid2 = PhaseGrid.balanced(2, 24)
    f = Symbol.gaussian(grid2, matrix=[[1, 2j], [-2j, 3]]).without_func()
    assert quantize(f, const2).hermiticity_defect() < 1e-6
    g = Symbol.gaussian(grid2, matrix=[[1, 2j], [0.5, 1]]).without_func()
    assert adjoint_check(g, const2) < 1e-6


def test_weyl_system_unitary_and_composition(const2):
    g = PhaseGrid.balanced(2, 32)
    psi = gaussian_state(g, 1.0).reshape(32, 32, 1)
    X = (np.array([2 * g.dx, -g.dx]), np.array([0.3, -0.2]))
    Y = (np.array([g.dx, 3 * g.dx]), np.array([0.1, 0.5]))
    assert np.isclose(np.linalg.norm(weyl_system_apply(X, psi, g, const2)), np.linalg.norm(psi))
    assert weyl_composition_defect(X, Y, psi, g, const2) < 1e-8


@pytest.mark.parametrize("eps", [1.0, 0.5, 0.25])
def test_commutators_zero_field_d1(eps):
    rep = commutation_check(PhaseGrid.balanced(1, 48), MagneticData.zero(1, eps))
    assert rep.qq < 1e-12 and rep.pq < 1e-8


def test_landau_and_symmetric_gauge_same_commutator():
    g = PhaseGrid.balanced(2, 16)
    a = commutation_check(g, MagneticData.constant(0.5, lam=0.5, eps=0.5))
    b = commutation_check(g, MagneticData.landau(0.5, lam=0.5, eps=0.5))
    assert np.isclose(a.pp_coefficient, b.pp_coefficient, atol=1e-10)
    assert np.isclose(a.pp_coefficient, -0.5 * 0.5 * 0.5, atol=1e-10)


def test_commutator_helpers_match_dense_products(zero1):
    g = PhaseGrid.balanced(1, 32)
    f = Symbol.gaussian(g, 1.0, center=(np.array([0.3]), np.array([0.2])))
    F = quantize(f, zero1)
    x = g.x_nodes
    Q = np.diag(x)
    near = np.abs(x[:, None] - x[None, :]) < g.x_extent
    dense = Q @ F.M - F.M @ Q
    assert np.abs(position_commutator(F, 0).M - dense)[near].max() < 1e-10
    # away from the seams the momentum commutator is the derivative of the kernel
    C = momentum_commutator(F, zero1, 0).M
    fprime = Symbol.scalar(g, lambda x, xi: -1j * (-(x[..., 0] - 0.3))
                           * np.exp(-((x[..., 0] - 0.3) ** 2 + (xi[..., 0] - 0.2) ** 2) / 2))
    assert np.abs(C - quantize(fprime, zero1).M).max() < 1e-7


def test_operator_norm_matches_svd(rng):
    M = rng.normal(size=(30, 30)) + 1j * rng.normal(size=(30, 30))
    assert np.isclose(operator_norm(M), np.linalg.norm(M, 2), rtol=1e-8)
