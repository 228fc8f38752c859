import numpy as np
import pytest

from magweyl.errors import BadPrincipalSymbolError, ContourError, NotInvertibleError
from magweyl.funcalc import (BumpFunction, ContourSpec, GaussianFunction, almost_analytic_dbar,
                             helffer_sjostrand, holomorphic_calculus, moyal_inverse,
                             moyal_resolvent, parametrix, resolvent_matrix, spectral_projection,
                             weight_symbol)
from magweyl.grid import PhaseGrid
from magweyl.magnetic import MagneticData
from magweyl.moyal import weyl_product_exact
from magweyl.quantizer import quantize
from magweyl.symbol import Symbol


@pytest.fixture
def harmonic32():
    g = PhaseGrid.balanced(1, 32)
    return Symbol.harmonic(g), MagneticData.zero(1)


def test_weight_symbols_are_mutual_inverses():
    g = PhaseGrid.balanced(1, 32)
    mag = MagneticData.zero(1)
    w2, wm2 = weight_symbol(g, 2, mag), weight_symbol(g, -2, mag)
    assert weight_symbol(g, 0, mag).lambda_m == 0.0
    prod = weyl_product_exact(wm2.symbol, w2.symbol, mag)
    assert prod.distance(Symbol.identity(g)) < 1e-10


def test_moyal_inverse_and_singular_input(harmonic32):
    h, mag = harmonic32
    one = Symbol.identity(h.grid)
    inv = moyal_inverse(h + one, mag)
    assert weyl_product_exact(inv, h + one, mag).distance(one) < 1e-10
    with pytest.raises(NotInvertibleError):
        moyal_inverse(Symbol.constant(h.grid, [[0.0]]), mag)


def test_resolvent_matches_matrix_inverse(harmonic32):
    h, mag = harmonic32
    R = quantize(moyal_resolvent(h, 1.0 + 2.0j, mag), mag).M
    ref = resolvent_matrix(quantize(h, mag), 1.0 + 2.0j)
    assert np.linalg.norm(R - ref, 2) / np.linalg.norm(ref, 2) < 1e-10


def test_parametrix_rejects_a_bad_seed():
    g = PhaseGrid.balanced(1, 16)
    mag = MagneticData.zero(1, 0.25)
    f = Symbol.scalar(g, lambda x, xi: 2 + 0 * x[..., 0])
    with pytest.raises(BadPrincipalSymbolError):
        parametrix(f, Symbol.scalar(g, lambda x, xi: 3 + 0 * x[..., 0]), 1, mag)
    with pytest.raises(ValueError):
        parametrix(f, f.pointwise_inverse(), 1, mag, side="middle")


@pytest.mark.parametrize("phi", [BumpFunction(0.5, 1.5, 2.0), GaussianFunction(0.3, 0.7)])
def test_test_function_derivatives(phi):
    u = np.linspace(-0.8, 1.4, 23)
    h = 1e-5
    ders = phi.derivatives(u, 2)
    assert np.allclose(ders[0], phi(u))
    assert np.allclose(ders[1], (phi(u + h) - phi(u - h)) / (2 * h), atol=1e-7)
    assert np.allclose(ders[2], (phi(u + h) - 2 * phi(u) + phi(u - h)) / h ** 2, atol=1e-4)


def test_almost_analytic_extension_vanishes_on_the_real_axis():
    phi = BumpFunction(0.0, 1.0)
    u = np.linspace(-0.9, 0.9, 11)
    assert np.abs(almost_analytic_dbar(phi, u, np.zeros_like(u), 3)).max() < 1e-14
    # the defect is of order |v|^ext_order
    small = np.abs(almost_analytic_dbar(phi, u, np.full_like(u, 1e-2), 3)).max()
    big = np.abs(almost_analytic_dbar(phi, u, np.full_like(u, 2e-2), 3)).max()
    assert 6 < big / small < 10


def test_helffer_sjostrand_against_eigendecomposition(harmonic32):
    h, mag = harmonic32
    H = quantize(h, mag).M
    ev, U = np.linalg.eigh(0.5 * (H + H.conj().T))
    phi = BumpFunction(2.0, 2.5)
    S = quantize(helffer_sjostrand(h, phi, 3, mag), mag).M
    assert np.linalg.norm(S - (U * phi(ev)) @ U.conj().T, 2) < 1e-4


def test_holomorphic_calculus_of_the_identity_function(harmonic32):
    h, mag = harmonic32
    H = quantize(h, mag).M
    ev = np.linalg.eigvalsh(0.5 * (H + H.conj().T))
    # phi(z) = z around the three lowest eigenvalues gives H times their projection
    c = ContourSpec(ev[0] - 0.5, ev[2] + 0.5, -0.5, 0.5)
    sym, P = holomorphic_calculus(h, lambda z: z, c, mag, return_matrix=True)
    assert np.isclose(np.trace(P).real, ev[:3].sum(), atol=1e-8)


def test_contour_too_close_to_spectrum_raises(harmonic32):
    h, mag = harmonic32
    ev = np.linalg.eigvalsh(quantize(h, mag).M)
    with pytest.raises(ContourError):
        holomorphic_calculus(h, lambda z: 1.0, ContourSpec(ev[0], ev[0] + 0.5, -0.5, 0.5), mag)


def test_contour_spec_geometry():
    c = ContourSpec(0.0, 2.0, -1.0, 1.0, M=8)
    z, w = c.nodes()
    assert z.size == 32 and np.isclose(w.sum(), 0.0)
    # closed contour: the integral of 1/(z - 1) is 2 pi i
    assert np.isclose(np.sum(w / (z - 1.0)), 2j * np.pi)
    assert np.isclose(c.distance_to(np.array([1.0 + 0j])), 1.0)
    with pytest.raises(ValueError):
        ContourSpec(1.0, 0.0, -1.0, 1.0)


def test_spectral_projection_ground_state(harmonic32):
    h, mag = harmonic32
    ev = np.linalg.eigvalsh(quantize(h, mag).M)
    P = spectral_projection(h, (ev[0] - 0.1, ev[0] + 0.1), mag)
    assert abs(P.trace - 1) < 1e-6 and P.idempotency_operator < 1e-8
