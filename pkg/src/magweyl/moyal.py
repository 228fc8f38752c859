"""Magnetic Weyl product: exact and integral routes, expansion, derivations, frames."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .derivatives import gradients, partial
from .errors import CapabilityError, ComposabilityError
from .grid import PhaseGrid, eps_multiplier, fourier_eval_matrix
from .magnetic import MagneticData, flux_triangle, line_integral_A
from .quantizer import (OperatorMatrix, band_product, dequantize, kernel_band, operator_norm,
                        momentum_commutator, position_commutator,
                        quantize, symbol_from_band)
from .symbol import Symbol, fiber_matmul


@dataclass
class FormalSeries:
    """Coefficients of an eps-expansion: ``terms[n]`` multiplies eps^n."""

    terms: list
    eps: float = 1.0

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a formal series needs at least one term")
        t0 = self.terms[0]
        for t in self.terms[1:]:
            if t.grid != t0.grid or (t.n_out, t.n_in) != (t0.n_out, t0.n_in):
                raise ComposabilityError("series terms must share grid and fiber shape")

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    def evaluate(self, eps: Optional[float] = None, upto: Optional[int] = None) -> Symbol:
        """sum_{n <= upto} eps^n terms[n]."""
        eps = self.eps if eps is None else eps
        upto = self.order if upto is None else min(upto, self.order)
        out = self.terms[0]
        for n in range(1, upto + 1):
            out = out + eps ** n * self.terms[n]
        return out

    def truncate(self, N: int) -> "FormalSeries":
        return FormalSeries(self.terms[: N + 1], self.eps)


# ---------------------------------------------------------------------------
# symplectic Fourier transform
# ---------------------------------------------------------------------------
def _centered_dft(n: int) -> np.ndarray:
    c = np.arange(n) - n // 2
    return np.exp(2j * np.pi * np.outer(c, c) / n)


def symplectic_fourier(f: Symbol) -> Symbol:
    """(F_s f)(x, xi) = (2 pi)^-d int e^{i (xi.x' - x.xi')} f(x', xi') dx' dxi'.

    On the self-dual grid the x-output pairs with xi' and the xi-output with x';
    F_s is an involution.
    """
    grid = f.grid
    d, n = grid.d, grid.n
    C = _centered_dft(n)
    out = f.values
    # xi-output axis d+j from x' axis j (kernel C), x-output axis j from xi' axis d+j (conj C)
    for j in range(d):
        out = np.moveaxis(np.tensordot(C, out, axes=([1], [j])), 0, j)
        out = np.moveaxis(np.tensordot(np.conj(C), out, axes=([1], [d + j])), 0, d + j)
    # swap roles: the transformed x' axis now labels xi, and vice versa
    perm = tuple(range(d, 2 * d)) + tuple(range(d)) + (2 * d, 2 * d + 1)
    out = np.transpose(out, perm) / n ** d
    return Symbol(grid, out)


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------
def _check_composable(f: Symbol, g: Symbol):
    if not f.composable(g):
        raise ComposabilityError(
            f"cannot compose fibers {f.n_out}x{f.n_in} after {g.n_out}x{g.n_in}")


def weyl_product_exact(f: Symbol, g: Symbol, mag: MagneticData, route: str = "auto") -> Symbol:
    """f #^B g = W^A(Op^A(f) Op^A(g)).

    ``route='dense'`` multiplies the assembled matrices; ``route='band'`` multiplies
    the kernel bands directly, which gives the same numbers without forming
    matrices of size (n/eps)^d.  ``'auto'`` picks dense for small state spaces.
    """
    _check_composable(f, g)
    state = f.grid.state_grid(mag.eps)
    if route == "auto":
        route = "dense" if state.size * max(f.n_out, f.n_in, g.n_in) <= 2048 else "band"
    if route == "dense":
        return dequantize(quantize(f, mag) @ quantize(g, mag), mag)
    if route != "band":
        raise ValueError("route must be 'auto', 'band' or 'dense'")
    P = band_product(kernel_band(f, mag), kernel_band(g, mag), state, f.grid.n)
    return symbol_from_band(P, f.grid, mag)


def _ftilde_table(f: Symbol, k: int) -> np.ndarray:
    """ftilde(p_h, y_t) = dxi^d sum_xi e^{-i y xi} f(p_h, xi) on refined positions.

    p_h = -L + h dx / (2k), h = 0..2kn-1; y_t = t dx for -n/2 <= t < n/2.
    """
    grid = f.grid
    d, n = grid.d, grid.n
    pts = -grid.x_extent + np.arange(2 * k * n) * grid.dx / (2 * k)
    if f.func is not None:
        axes = [pts] * d + [grid.xi_nodes] * d
        mesh = np.meshgrid(*axes, indexing="ij")
        X = np.stack(mesh[:d], axis=-1)
        XI = np.stack(mesh[d:], axis=-1)
        vals = np.broadcast_to(np.asarray(f.func(X, XI), dtype=complex),
                               X.shape[:-1] + (f.n_out, f.n_in))
    else:
        E = fourier_eval_matrix(n, grid.x_extent, pts)
        vals = f.values
        for j in range(d):
            vals = np.moveaxis(np.tensordot(E, vals, axes=([1], [j])), 0, j)
    t = np.arange(-(n // 2), n // 2)
    phi = np.exp(-1j * np.outer(t * grid.dx, grid.xi_nodes)) * grid.dxi
    for j in range(d):
        vals = np.moveaxis(np.tensordot(phi, vals, axes=([1], [d + j])), 0, d + j)
    return vals


def weyl_product_integral(f: Symbol, g: Symbol, mag: MagneticData) -> Symbol:
    """Magnetic Weyl product from its phase-space integral formula.

    In partial Fourier variables the formula reads
    (f # g)(x, xi) = (2 pi)^-2d int dy dz e^{i xi.(y+z)} e^{-i lam gamma(x,y,z)}
                     ftilde(x - eps z/2, y) gtilde(x + eps y/2, z),
    gamma = eps^-1 Flux(x - eps(y+z)/2, x + eps(y-z)/2, x + eps(y+z)/2), and
    ftilde the Fourier transform in momentum.  Evaluated with a loop over z and
    a final DFT in w = y + z.
    """
    _check_composable(f, g)
    grid = f.grid
    d, n = grid.d, grid.n
    if d > 2:
        raise CapabilityError("integral route supports d <= 2")
    eps = mag.eps
    k = eps_multiplier(eps)
    nr = 2 * k * n
    # f table as (r, m, h..., y...); g table with z leading: (z..., r, m, h...)
    Rf = np.moveaxis(_ftilde_table(f, k), (-2, -1), (0, 1))
    Rg = np.ascontiguousarray(np.moveaxis(_ftilde_table(g, k), tuple(range(2 * d + 2)),
                                          tuple(range(d + 2, 2 * d + 2)) + (0, 1) + tuple(range(2, d + 2))))
    r, mm, c = f.n_out, f.n_in, g.n_in
    t = np.arange(-(n // 2), n // 2)
    h = n // 2
    magnetic = mag.kind != "zero" and mag.lam != 0 and d == 2
    S = np.zeros((r, c) + (n,) * (2 * d), dtype=complex)
    # gidx_j[x_j, y_j] = (2k x_j + t_{y_j}) mod nr, broadcast over (x..., y...)
    gidx = []
    for j in range(d):
        base = (2 * k * np.arange(n)[:, None] + t[None, :]) % nr
        gidx.append(base.reshape([n if a in (j, d + j) else 1 for a in range(2 * d)]))
    if magnetic:
        mesh = np.meshgrid(*([grid.x_nodes] * d + [t * grid.dx] * d), indexing="ij")
        Xpos = np.stack(mesh[:d], axis=-1)
        Ypos = np.stack(mesh[d:], axis=-1)
    for z in np.ndindex(*(n,) * d):
        tz = [int(t[zj]) for zj in z]
        # keep y with w = y + z inside the band, the range the output DFT represents
        ysl = [slice(max(0, -v), min(n, n - v)) for v in tz]
        wsl = [slice(ys.start + v, ys.stop + v) for ys, v in zip(ysl, tz)]
        Fz = Rf
        for j in range(d):
            Fz = Fz.take((2 * k * np.arange(n) - tz[j]) % nr, axis=2 + j)
        Fz = Fz[(slice(None),) * (2 + d) + tuple(ysl)]
        Gz = Rg[z][(slice(None), slice(None)) + tuple(gidx)][(slice(None),) * (2 + d) + tuple(ysl)]
        term = np.empty((r, c) + Fz.shape[2:], dtype=complex)
        for a_ in range(r):
            for b_ in range(c):
                acc = Fz[a_, 0] * Gz[0, b_]
                for m_ in range(1, mm):
                    acc += Fz[a_, m_] * Gz[m_, b_]
                term[a_, b_] = acc
        if magnetic:
            zpos = np.array(tz, dtype=float) * grid.dx
            Yp = Ypos[(slice(None),) * d + tuple(ysl)]
            q = Xpos[(slice(None),) * d + tuple(ysl)] - eps * (Yp + zpos) / 2
            gamma = flux_triangle(mag, q, Yp, np.broadcast_to(zpos, Yp.shape)) / eps
            term *= np.exp(-1j * mag.lam * gamma)
        S[(slice(None),) * (2 + d) + tuple(wsl)] += term
    S = np.moveaxis(S, (0, 1), (-2, -1))
    psi = np.exp(1j * np.outer(grid.xi_nodes, t * grid.dx))
    out = S
    for j in range(d):
        out = np.moveaxis(np.tensordot(psi, out, axes=([1], [d + j])), 0, d + j)
    out = out * (grid.dx / (2 * np.pi)) ** (2 * d)
    return Symbol(grid, out)


# ---------------------------------------------------------------------------
# Poisson bracket and expansion
# ---------------------------------------------------------------------------
def poisson_bracket_magnetic(f: Symbol, g: Symbol, mag: MagneticData) -> Symbol:
    """{f, g}_lamB = grad_xi f . grad_x g - grad_x f . grad_xi g - lam sum B_jk d_xi_j f d_xi_k g.

    Matrix products keep the operator order (f always on the left).
    """
    _check_composable(f, g)
    d = f.grid.d
    fx, fxi = gradients(f)
    gx, gxi = gradients(g)
    out = None
    for j in range(d):
        term = fxi[j] @ gx[j] - fx[j] @ gxi[j]
        out = term if out is None else out + term
    if mag.lam != 0 and d >= 2 and mag.kind != "zero":
        X, _ = f.grid.mesh()
        B = mag.B(X)
        for j in range(d):
            for l in range(d):
                if j == l:
                    continue
                prod = (fxi[j] @ gxi[l]).values
                out = out - Symbol(f.grid, mag.lam * B[..., j, l][..., None, None] * prod)
    return out


def weyl_product_expansion(f: Symbol, g: Symbol, mag: MagneticData, order: int = 1) -> FormalSeries:
    """[f g, -(i/2) {f, g}_lamB] truncated at ``order``."""
    _check_composable(f, g)
    if order not in (0, 1):
        raise CapabilityError("expansion terms of order >= 2 are not implemented")
    terms = [f @ g]
    if order == 1:
        terms.append(-0.5j * poisson_bracket_magnetic(f, g, mag))
    return FormalSeries(terms, mag.eps)


# ---------------------------------------------------------------------------
# derivations
# ---------------------------------------------------------------------------
def derivation(f: Symbol, axis: str, j: int, mag: MagneticData, route: str = "exact") -> Symbol:
    """ad_{x_j} f = x_j # f - f # x_j or ad_{xi_j} f = xi_j # f - f # xi_j.

    The exact route dequantizes the commutator of Op^A(f) with Q_j or P^A_j,
    taken with minimal-image differences on the periodic grid.

    ``route='expanded'`` evaluates the closed forms
    ad_{x_j} f = i eps d_xi_j f and
    ad_{xi_j} f = -i eps d_x_j f + i eps lam sum_k B_jk d_xi_k f.
    """
    if axis not in ("x", "xi"):
        raise ValueError("axis must be 'x' or 'xi'")
    grid = f.grid
    eps = mag.eps
    if route == "exact":
        F = quantize(f, mag)
        C = position_commutator(F, j) if axis == "x" else momentum_commutator(F, mag, j)
        return dequantize(C, mag)
    if route != "expanded":
        raise ValueError("route must be 'exact' or 'expanded'")
    if axis == "x":
        return 1j * eps * partial(f, "xi", j)
    out = -1j * eps * partial(f, "x", j)
    if mag.lam != 0 and grid.d >= 2 and mag.kind != "zero":
        X, _ = grid.mesh()
        B = mag.B(X)
        vals = out.values.copy()
        for k in range(grid.d):
            if k != j:
                vals = vals + 1j * eps * mag.lam * B[..., j, k][..., None, None] * partial(f, "xi", k).values
        out = Symbol(grid, vals)
    return out


def iterated_derivation(f: Symbol, a: Sequence[int], alpha: Sequence[int], mag: MagneticData,
                        route: str = "exact") -> Symbol:
    """ad_xi^a ad_x^alpha f, position derivations innermost and momentum ones outermost."""
    out = f
    for j, times in enumerate(alpha):
        for _ in range(times):
            out = derivation(out, "x", j, mag, route)
    for j, times in enumerate(a):
        for _ in range(times):
            out = derivation(out, "xi", j, mag, route)
    return out


def beals_diagnostic(f: Symbol, mag: MagneticData, a, alpha, m: float = 0.0, rho: float = 1.0) -> float:
    """|| Op^A(w_{-m + rho|alpha|} # ad_xi^a ad_x^alpha f) || on the grid."""
    from .funcalc import weight_symbol

    d = f.grid.d
    a = tuple(np.broadcast_to(a, (d,)).tolist())
    alpha = tuple(np.broadcast_to(alpha, (d,)).tolist())
    D = iterated_derivation(f, a, alpha, mag)
    w = weight_symbol(f.grid, -m + rho * sum(alpha), mag, dim=f.n_out)
    return operator_norm(quantize(weyl_product_exact(w.symbol, D, mag), mag).M)


# ---------------------------------------------------------------------------
# Gabor frame coefficients
# ---------------------------------------------------------------------------
def bump(t: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - t^2)) on |t| < 1, zero outside."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


@dataclass(frozen=True)
class FrameCutoff:
    """chi(x) = prod_j b(x_j / radius) / sqrt(sum_gamma prod_j b((x_j - gamma_j)/radius)^2).

    Lattice of spacing ``spacing``; by construction sum_gamma chi(x - gamma)^2 = 1.
    """

    radius: float = np.pi
    spacing: float = np.pi

    def raw(self, x: np.ndarray) -> np.ndarray:
        return np.prod(bump(np.asarray(x) / self.radius), axis=-1)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        reach = int(np.ceil(self.radius / self.spacing)) + 1
        # sum over lattice translates near x; the sum is lattice periodic
        base = x - self.spacing * np.round(x / self.spacing)
        total = np.zeros(x.shape[:-1])
        for off in np.ndindex(*(2 * reach + 1,) * d):
            shift = (np.array(off) - reach) * self.spacing
            total = total + self.raw(base - shift) ** 2
        return self.raw(x) / np.sqrt(total)

    def partition_defect(self, x: np.ndarray, lattice: np.ndarray) -> float:
        """max |sum_gamma chi(x - gamma)^2 - 1| over the sample points x."""
        s = sum(self(x - g) ** 2 for g in lattice)
        return float(np.max(np.abs(s - 1.0)))


def frame_function(state: PhaseGrid, chi: Callable, gamma, k, mag: MagneticData) -> np.ndarray:
    """G_{gamma,k}(x) = (2 pi)^{d/2} e^{-i lam/eps int_[eps x, eps gamma] A} chi(x - gamma) e^{i k (x - gamma)}."""
    x = state.position_mesh()
    d = state.d
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (d,))
    k = np.broadcast_to(np.asarray(k, dtype=float), (d,))
    # minimal image on the torus
    diff = x - gamma
    diff = diff - 2 * state.x_extent * np.round(diff / (2 * state.x_extent))
    G = (2 * np.pi) ** (d / 2) * chi(diff) * np.exp(1j * diff @ k)
    if mag.kind != "zero" and mag.lam != 0:
        ends = gamma + 0 * x
        G = G * np.exp(-1j * mag.lam / mag.eps * line_integral_A(mag, mag.eps * (gamma + diff),
                                                                   mag.eps * ends))
    return G.reshape(-1)


def gabor_coefficients(F: OperatorMatrix, chi: Callable, gamma, gamma_p, k, k_p,
                       mag: MagneticData) -> np.ndarray:
    """n_out x n_in matrix <G_{gamma',k'} (x) e_r, F G_{gamma,k} (x) e_c>."""
    state = F.state
    G = frame_function(state, chi, gamma, k, mag)
    Gp = frame_function(state, chi, gamma_p, k_p, mag)
    w = state.dx ** state.d
    out = np.zeros((F.n_out, F.n_in), dtype=complex)
    for c in range(F.n_in):
        v = np.zeros((G.size, F.n_in), dtype=complex)
        v[:, c] = G
        Fv = (F.M @ v.reshape(-1)).reshape(G.size, F.n_out)
        out[:, c] = (np.conj(Gp) @ Fv) * w
    return out
