"""Weights, Moyal inverses and resolvents, parametrices and functional calculi."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import (BadPrincipalSymbolError, ContourError, MagWeylWarning,
                     NotInvertibleError)
from .grid import PhaseGrid, japanese
from .magnetic import MagneticData
from .moyal import FormalSeries, bump, weyl_product_exact
from .quantizer import OperatorMatrix, dequantize, quantize
from .symbol import Symbol

COND_LIMIT = 1e8


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class WeightSymbol:
    """w_m = <xi>^m + lambda(m) for m >= 0, its Moyal inverse for m < 0."""

    m: float
    lambda_m: float
    symbol: Symbol


def _shift_for(grid: PhaseGrid, m: float, mag: MagneticData, dim: int) -> float:
    p = Symbol.scalar(grid, lambda x, xi: japanese(xi) ** m, dim)
    H = quantize(p, mag).M
    low = float(np.linalg.eigvalsh(0.5 * (H + H.conj().T))[0])
    # Op(<xi>^m) >= 1 already needs no shift (m = 0 gives exactly the identity)
    return 0.0 if low >= 1.0 - 1e-9 else 1.0 - low + 0.1


def weight_symbol(grid: PhaseGrid, m: float, mag: MagneticData, dim: int = 1) -> WeightSymbol:
    """Weight w_m; for m < 0 the Moyal inverse of w_|m|."""
    lam = _shift_for(grid, abs(m), mag, dim)
    p = Symbol.scalar(grid, lambda x, xi: japanese(xi) ** abs(m) + lam, dim)
    if m >= 0:
        return WeightSymbol(m, lam, p)
    try:
        inv = moyal_inverse(p, mag)
    except NotInvertibleError as exc:
        raise NotInvertibleError(f"singular weight of order {m}: {exc}") from exc
    return WeightSymbol(m, lam, inv)


# ---------------------------------------------------------------------------
# inverses and resolvents
# ---------------------------------------------------------------------------
def _checked_inverse(M: np.ndarray) -> np.ndarray:
    if M.shape[0] != M.shape[1]:
        raise NotInvertibleError("operator matrix is not square")
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NotInvertibleError(f"condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    return np.linalg.inv(M)


def moyal_inverse(f: Symbol, mag: MagneticData) -> Symbol:
    """f^(-1)# = W^A(Op^A(f)^-1)."""
    F = quantize(f, mag)
    return dequantize(F._like(_checked_inverse(F.M), F.n_in, F.n_out), mag)


def moyal_resolvent(h: Symbol, z: complex, mag: MagneticData) -> Symbol:
    """(h - z)^(-1)#."""
    return moyal_inverse(h - z * Symbol.identity(h.grid, h.n_out), mag)


def resolvent_matrix(H: OperatorMatrix, z: complex) -> np.ndarray:
    return _checked_inverse(H.M - z * np.eye(H.M.shape[0]))


# ---------------------------------------------------------------------------
# parametrices
# ---------------------------------------------------------------------------
def parametrix(f: Symbol, g0: Symbol, N: int, mag: MagneticData, side: str = "left") -> FormalSeries:
    """eps-series of the left (or right) parametrix of f seeded by g0.

    Left: r0 = eps^-1 (g0 # f - Id), terms[n] = (-1)^n r0^#n # g0, so the
    degree-N truncation has left defect -(-eps r0)^#(N+1).
    Right: r0 = eps^-1 (f # g0 - Id), terms[n] = g0 # (-1)^n r0^#n.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    eps = mag.eps
    prod = weyl_product_exact(g0, f, mag) if side == "left" else weyl_product_exact(f, g0, mag)
    ident = Symbol.identity(f.grid, prod.n_out)
    u = prod - ident
    scale = max(1.0, f.sup_norm() * g0.sup_norm())
    defect = u.sup_norm()
    if defect > 2 * eps * scale:
        raise BadPrincipalSymbolError(
            f"seed defect {defect:.3e} exceeds 2 eps scale = {2 * eps * scale:.3e}")
    r0 = u / eps
    terms = [g0]
    power = None
    for n in range(1, N + 1):
        power = r0 if power is None else weyl_product_exact(power, r0, mag)
        sign = (-1) ** n
        term = weyl_product_exact(power, g0, mag) if side == "left" else weyl_product_exact(g0, power, mag)
        terms.append(sign * term)
    return FormalSeries(terms, eps)


def parametrix_defect(f: Symbol, series: FormalSeries, N: int, mag: MagneticData,
                      side: str = "left") -> float:
    """sup-norm of trunc_N # f - Id (left) or f # trunc_N - Id (right)."""
    g = series.evaluate(mag.eps, N)
    prod = weyl_product_exact(g, f, mag) if side == "left" else weyl_product_exact(f, g, mag)
    return (prod - Symbol.identity(f.grid, prod.n_out)).sup_norm()


# ---------------------------------------------------------------------------
# smooth test functions for the calculi
# ---------------------------------------------------------------------------
class BumpFunction:
    """phi(u) = amplitude * exp(1 - 1/(1 - s^2)), s = (u - center)/radius, with exact derivatives."""

    def __init__(self, center: float = 0.0, radius: float = 1.0, amplitude: float = 1.0):
        self.center = float(center)
        self.radius = float(radius)
        self.amplitude = float(amplitude)

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.radius, self.center + self.radius

    def derivatives(self, u: np.ndarray, order: int) -> list[np.ndarray]:
        """[phi, phi', ..., phi^(order)] at u."""
        s = (np.asarray(u, dtype=float) - self.center) / self.radius
        inside = np.abs(s) < 1
        si = np.where(inside, s, 0.0)
        # g = 1 - (1/(1-s) + 1/(1+s))/2, y = exp(g), y' = g' y
        g = [1.0 - 0.5 * (1 / (1 - si) + 1 / (1 + si))]
        for k in range(1, order + 1):
            gk = -0.5 * math.factorial(k) * (1 / (1 - si) ** (k + 1) + (-1) ** k / (1 + si) ** (k + 1))
            g.append(gk)
        y = [np.exp(g[0])]
        for k in range(order):
            y.append(sum(math.comb(k, j) * g[j + 1] * y[k - j] for j in range(k + 1)))
        return [np.where(inside, self.amplitude * yk / self.radius ** k, 0.0) for k, yk in enumerate(y)]

    def __call__(self, u):
        return self.derivatives(u, 0)[0]


class GaussianFunction:
    """phi(u) = exp(-(u - c)^2 / (2 s^2)) with Hermite-polynomial derivatives."""

    def __init__(self, center: float = 0.0, width: float = 1.0):
        self.center = float(center)
        self.width = float(width)

    @property
    def support(self) -> tuple[float, float]:
        return self.center - 8 * self.width, self.center + 8 * self.width

    def derivatives(self, u, order):
        t = (np.asarray(u, dtype=float) - self.center) / self.width
        base = np.exp(-t ** 2 / 2)
        # probabilists' Hermite: d^k/dt^k e^{-t^2/2} = (-1)^k He_k(t) e^{-t^2/2}
        he = [np.ones_like(t), t]
        for k in range(1, order):
            he.append(t * he[k] - k * he[k - 1])
        return [(-1) ** k * he[k] * base / self.width ** k for k in range(order + 1)]

    def __call__(self, u):
        return self.derivatives(u, 0)[0]


# ---------------------------------------------------------------------------
# Helffer-Sjostrand
# ---------------------------------------------------------------------------
def _tau(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Plateau cutoff: 1 on |s| <= 1/2, smooth decay to 0 at |s| = 1.  Returns (tau, tau')."""
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    # smooth step h(r) = e(1-r) / (e(1-r) + e(r)), e(r) = exp(-1/r) for r > 0
    r = np.clip(2 * a - 1, 0.0, 1.0)

    def e(x):
        return np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)

    def de(x):
        xs = np.where(x > 0, x, 1.0)
        return np.where(x > 0, np.exp(-1.0 / xs) / xs ** 2, 0.0)

    num = e(1 - r)
    den = e(1 - r) + e(r)
    tau = num / den
    dnum = -de(1 - r)
    dden = -de(1 - r) + de(r)
    dtau_dr = (dnum * den - num * dden) / den ** 2
    inside = (a > 0.5) & (a < 1.0)
    dtau = np.where(inside, dtau_dr * 2 * np.sign(s), 0.0)
    return tau, dtau


def almost_analytic_dbar(phi, u: np.ndarray, v: np.ndarray, ext_order: int) -> np.ndarray:
    """d/dzbar of phi~(u + iv) = tau(v/<u>) sum_{k<=K} phi^(k)(u) (iv)^k / k!."""
    K = ext_order
    ders = phi.derivatives(u, K + 1)
    jp = np.sqrt(1 + u ** 2)
    s = v / jp
    tau, dtau = _tau(s)
    S = sum(ders[k] * (1j * v) ** k / math.factorial(k) for k in range(K + 1))
    top = ders[K + 1] * (1j * v) ** K / math.factorial(K)
    # (d_u + i d_v) tau(v/<u>) = tau'(s) (-v u / <u>^3 + i / <u>)
    dtau_full = dtau * (-v * u / jp ** 3 + 1j / jp)
    return 0.5 * (tau * top + S * dtau_full)


@dataclass
class HSResult:
    symbol: Symbol
    matrix: np.ndarray
    skipped: int
    nodes: int


def _tridiagonal(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction H = Q T Q^*; T is tridiagonal for Hermitian H."""
    T, Q = scipy.linalg.hessenberg(0.5 * (H + H.conj().T), calc_q=True)
    band = np.zeros((3, T.shape[0]), dtype=complex)
    band[0, 1:] = np.diag(T, 1)
    band[1] = np.diag(T)
    band[2, :-1] = np.diag(T, -1)
    return band, Q


def helffer_sjostrand(h: Symbol, phi, ext_order: int = 3, mag: Optional[MagneticData] = None,
                      n_u: int = 128, n_v: tuple[int, int] = (16, 32), max_skip_fraction: float = 0.05,
                      return_details: bool = False):
    """phi^B(h) = (1/pi) int dz dbar(phi~)(z) (h - z)^(-1)# over the plane.

    Resolvents are Moyal resolvents; since the Wigner transform is linear the
    quadrature sum is accumulated on operator matrices and transformed once.
    Each u carries its own v-rule: Gauss-Legendre panels on the plateau
    |v| <= <u>/2 of the cutoff and on its ramp <u>/2 <= |v| <= <u>.  The
    resolvents come from banded solves after one Householder reduction of
    Op(h) to tridiagonal form, and the nodes at -v reuse the adjoint of the
    resolvent at +v.
    """
    if mag is None:
        mag = MagneticData.zero(h.grid.d)
    if not h.is_hermitian(1e-10):
        raise ValueError("helffer_sjostrand needs a Hermitian-valued symbol")
    H = quantize(h, mag)
    lo, hi = phi.support
    uu, wu = np.polynomial.legendre.leggauss(n_u)
    u = 0.5 * (hi - lo) * uu + 0.5 * (hi + lo)
    wu = 0.5 * (hi - lo) * wu
    x1, w1 = np.polynomial.legendre.leggauss(n_v[0])
    x2, w2 = np.polynomial.legendre.leggauss(n_v[1])
    band, Q = _tridiagonal(H.M)
    N = band.shape[1]
    eye = np.eye(N)
    acc = np.zeros((N, N), dtype=complex)
    skipped = 0
    total = 0
    for ui, wi in zip(u, wu):
        jp = float(np.sqrt(1 + ui ** 2))
        v = np.concatenate([0.25 * jp * (x1 + 1), 0.5 * jp + 0.25 * jp * (x2 + 1)])
        wv = 0.25 * jp * np.concatenate([w1, w2])
        up = almost_analytic_dbar(phi, np.full(v.shape, ui), v, ext_order)
        dn = almost_analytic_dbar(phi, np.full(v.shape, ui), -v, ext_order)
        for vj, wj, a, b in zip(v, wv, up, dn):
            wa, wb = wi * wj * a / np.pi, wi * wj * b / np.pi
            if wa == 0 and wb == 0:
                continue
            total += 2
            shifted = band.copy()
            shifted[1] -= ui + 1j * vj
            try:
                R = scipy.linalg.solve_banded((1, 1), shifted, eye, check_finite=False)
            except np.linalg.LinAlgError:
                skipped += 2
                continue
            if not np.all(np.isfinite(R)):
                skipped += 2
                continue
            # (T - conj z)^-1 = ((T - z)^-1)^* for Hermitian T
            acc += wa * R + wb * R.conj().T
    if total and skipped > max_skip_fraction * total:
        raise NotInvertibleError(f"{skipped} of {total} quadrature nodes hit the spectrum")
    if skipped:
        warnings.warn(f"skipped {skipped} quadrature nodes near the spectrum", MagWeylWarning)
    M = Q @ acc @ Q.conj().T
    sym = dequantize(H._like(M), mag)
    if return_details:
        return HSResult(sym, M, skipped, total)
    return sym


# ---------------------------------------------------------------------------
# holomorphic calculus
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ContourSpec:
    """Counterclockwise axis-aligned rectangle [u0, u1] x [v0, v1] with M nodes per edge."""

    u0: float
    u1: float
    v0: float
    v1: float
    M: int = 32

    def __post_init__(self):
        if not (self.u0 < self.u1 and self.v0 < self.v1):
            raise ValueError("rectangle corners must satisfy u0 < u1 and v0 < v1")

    @classmethod
    def around(cls, a: float, b: float, margin: float, M: int = 32) -> "ContourSpec":
        return cls(a - margin, b + margin, -margin, margin, M)

    def nodes(self, M: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
        """Points z and weights dz of Gauss-Legendre rules on the four edges."""
        M = self.M if M is None else M
        x, w = np.polynomial.legendre.leggauss(M)
        s = 0.5 * (x + 1)
        w = 0.5 * w
        corners = [complex(self.u0, self.v0), complex(self.u1, self.v0),
                   complex(self.u1, self.v1), complex(self.u0, self.v1)]
        zs, ws = [], []
        for k in range(4):
            a, b = corners[k], corners[(k + 1) % 4]
            zs.append(a + s * (b - a))
            ws.append(w * (b - a))
        return np.concatenate(zs), np.concatenate(ws)

    def distance_to(self, points: np.ndarray) -> float:
        """Smallest distance from the rectangle boundary to the given points."""
        p = np.asarray(points, dtype=complex)
        du = np.clip(p.real, self.u0, self.u1)
        dv = np.clip(p.imag, self.v0, self.v1)
        inside = (p.real > self.u0) & (p.real < self.u1) & (p.imag > self.v0) & (p.imag < self.v1)
        to_edges = np.minimum.reduce([p.real - self.u0, self.u1 - p.real, p.imag - self.v0, self.v1 - p.imag])
        outside = np.abs(p - (du + 1j * dv))
        d = np.where(inside, to_edges, outside)
        return float(np.min(d)) if d.size else np.inf


def _contour_matrix(H: np.ndarray, phi: Callable, contour: ContourSpec, M: int) -> np.ndarray:
    z, w = contour.nodes(M)
    eye = np.eye(H.shape[0])
    acc = np.zeros_like(H, dtype=complex)
    for zk, wk in zip(z, w):
        acc += (1j / (2 * np.pi)) * phi(zk) * wk * np.linalg.solve(H - zk * eye, eye)
    return acc


def holomorphic_calculus(h: Symbol, phi: Callable, contour: ContourSpec, mag: MagneticData,
                         spectral_tol: float = 1e-8, conv_tol: float = 1e-8,
                         max_M: int = 1024, return_matrix: bool = False):
    """phi^B(h) = (i / 2 pi) contour-int phi(z) (h - z)^(-1)# dz.

    The node count doubles from ``contour.M`` until the operator result changes
    by less than ``conv_tol`` (relative); the contour must stay clear of the
    spectrum of Op^A(h) by more than 2 * spectral_tol.
    """
    H = quantize(h, mag)
    evals = np.linalg.eigvals(H.M)
    dist = contour.distance_to(evals)
    if dist <= 2 * spectral_tol:
        raise ContourError(f"contour passes within {dist:.2e} of the spectrum")
    M = contour.M
    prev = _contour_matrix(H.M, phi, contour, M)
    while True:
        M *= 2
        cur = _contour_matrix(H.M, phi, contour, M)
        change = np.linalg.norm(cur - prev, 2) / max(np.linalg.norm(cur, 2), 1.0)
        prev = cur
        if change < conv_tol:
            break
        if M >= max_M:
            raise ContourError(f"contour quadrature did not converge (change {change:.2e})")
    sym = dequantize(H._like(prev), mag)
    return (sym, prev) if return_matrix else sym


@dataclass
class ProjectionResult:
    symbol: Symbol
    matrix: np.ndarray
    idempotency_symbol: float
    idempotency_operator: float
    trace: float


def spectral_projection(h: Symbol, band: tuple[float, float], mag: MagneticData,
                        margin: Optional[float] = None, M: int = 32) -> ProjectionResult:
    """Riesz projection onto the spectrum of Op^A(h) inside ``band``.

    The rectangle is placed around ``band``; ``margin`` defaults to half the
    distance from the band edges to the nearest eigenvalue outside it.
    """
    H = quantize(h, mag)
    evals = np.sort(np.linalg.eigvalsh(0.5 * (H.M + H.M.conj().T)))
    a, b = band
    if margin is None:
        outside = evals[(evals < a) | (evals > b)]
        inside = evals[(evals >= a) & (evals <= b)]
        gaps = [abs(e - a) for e in outside if e < a] + [abs(e - b) for e in outside if e > b]
        gaps += [abs(e - a) for e in inside] + [abs(e - b) for e in inside]
        margin = 0.5 * min(gaps) if gaps else 1.0
        margin = max(margin, 1e-6)
    contour = ContourSpec(a - margin, b + margin, -margin, margin, M)
    sym, P = holomorphic_calculus(h, lambda z: 1.0, contour, mag, return_matrix=True)
    idem_sym = (weyl_product_exact(sym, sym, mag) - sym).sup_norm()
    Pq = quantize(sym, mag).M
    idem_op = float(np.linalg.norm(Pq @ Pq - Pq, 2))
    return ProjectionResult(sym, Pq, idem_sym, idem_op, float(np.trace(Pq).real))
