"""Magnetic Weyl quantization on the periodic grid: kernels, matrices, Wigner inverse.

Discretization contract
-----------------------
Symbols live on a :class:`PhaseGrid` with spacing ``dx``.  For ``eps = 1/k`` states
live on ``grid.state_grid(eps)``: the same spacing, box stretched ``k`` times, so
that a macroscopic symbol node ``x`` sits on the state node ``x / eps``.

The kernel is stored along anti-diagonals: ``K(a, a + t)`` for differences
``-n/2 <= t < n/2`` (in units of ``dx``).  Its value uses the symbol at the
midpoint ``eps (x_a + t dx / 2)``; for odd ``t`` that midpoint sits half a cell
off the grid and the trigonometric interpolant supplies the value.  The Wigner
transform undoes each step, so for ``eps = 1`` the two maps are exact inverses.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.fft

from .grid import PhaseGrid, eps_multiplier, fourier_eval_matrix, fourier_shift
from .magnetic import MagneticData, flux_triangle, line_integral_A
from .symbol import Symbol, fiber_matmul


# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class OperatorKernel:
    """K(x, y) on the state grid, indexed (x..., y..., row, col)."""

    grid: PhaseGrid
    eps: float
    values: np.ndarray

    @property
    def state(self) -> PhaseGrid:
        return self.grid.state_grid(self.eps)

    @property
    def n_out(self) -> int:
        return self.values.shape[-2]

    @property
    def n_in(self) -> int:
        return self.values.shape[-1]

    def adjoint(self) -> "OperatorKernel":
        """K*(x, y) = K(y, x)^dagger."""
        d = self.grid.d
        perm = tuple(range(d, 2 * d)) + tuple(range(d)) + (2 * d + 1, 2 * d)
        return OperatorKernel(self.grid, self.eps, np.conj(np.transpose(self.values, perm)))


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense matrix of an operator on L^2(state grid, C^n_in) -> L^2(state grid, C^n_out).

    Rows/columns are ordered position-major, fiber-minor; the quadrature weight
    dx^d is included, so ``M @ psi`` approximates the integral operator.
    """

    grid: PhaseGrid
    eps: float
    n_out: int
    n_in: int
    M: np.ndarray

    @property
    def state(self) -> PhaseGrid:
        return self.grid.state_grid(self.eps)

    def kernel(self) -> OperatorKernel:
        st = self.state
        shape = (st.n,) * st.d
        K = self.M.reshape(shape + (self.n_out,) + shape + (self.n_in,)) / st.dx ** st.d
        d = st.d
        perm = tuple(range(d)) + tuple(range(d + 1, 2 * d + 1)) + (d, 2 * d + 1)
        return OperatorKernel(self.grid, self.eps, np.transpose(K, perm))

    def _like(self, M, n_out=None, n_in=None) -> "OperatorMatrix":
        return OperatorMatrix(self.grid, self.eps,
                              self.n_out if n_out is None else n_out,
                              self.n_in if n_in is None else n_in, M)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            if self.n_in != other.n_out:
                from .errors import ComposabilityError
                raise ComposabilityError("fiber dimensions do not compose")
            return self._like(self.M @ other.M, self.n_out, other.n_in)
        return self.M @ other

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return self._like(self.M + other.M)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return self._like(self.M - other.M)

    def __mul__(self, c) -> "OperatorMatrix":
        return self._like(c * self.M)

    __rmul__ = __mul__

    def adjoint(self) -> "OperatorMatrix":
        return self._like(self.M.conj().T, self.n_in, self.n_out)

    def identity_like(self) -> "OperatorMatrix":
        return self._like(np.eye(self.M.shape[0], dtype=complex))

    def shifted(self, z: complex) -> "OperatorMatrix":
        """M - z Id."""
        return self._like(self.M - z * np.eye(self.M.shape[0]))

    def inverse(self) -> "OperatorMatrix":
        return self._like(np.linalg.inv(self.M), self.n_in, self.n_out)

    def norm(self) -> float:
        return operator_norm(self.M)

    def hermiticity_defect(self) -> float:
        scale = max(np.linalg.norm(self.M), 1e-300)
        return float(np.linalg.norm(self.M - self.M.conj().T) / scale)


def operator_norm(M: np.ndarray, tol: float = 1e-10, max_iter: int = 500, seed: int = 0) -> float:
    """Largest singular value: ARPACK for large matrices, power iteration on M^dagger M otherwise."""
    M = np.asarray(M)
    if M.size == 0 or not np.any(M):
        return 0.0
    if min(M.shape) > 64:
        from scipy.sparse.linalg import ArpackNoConvergence, svds
        try:
            return float(svds(M, k=1, tol=tol, return_singular_vectors=False, random_state=seed)[0])
        except ArpackNoConvergence:
            pass
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[1]) + 1j * rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = M.conj().T @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
        new = np.sqrt(nw)
        if abs(new - sigma) <= tol * new:
            return float(new)
        sigma = new
    return float(sigma)


# ---------------------------------------------------------------------------
# kernel map and its inverse
# ---------------------------------------------------------------------------
def _differences(n: int) -> np.ndarray:
    return np.arange(-(n // 2), n // 2)


def _midpoint_positions(grid: PhaseGrid, state: PhaseGrid) -> tuple[np.ndarray, int]:
    """Half-cell midpoint positions x_a + t dx / 2 indexed by 2a + t + n/2."""
    n, ns = grid.n, state.n
    offset = n // 2
    h = np.arange(2 * ns + n - 1)
    return -state.x_extent + (h - offset) * grid.dx / 2, offset


_PHASE_CACHE: dict = {}


def _phase(mag: MagneticData, state: PhaseGrid, n: int) -> Optional[np.ndarray]:
    """exp(-i lam/eps int_{[eps x_a, eps (x_a + t dx)]} A), shape (a..., t...)."""
    if mag.kind == "zero" or mag.lam == 0:
        return None
    key = (id(mag), state.d, state.n, state.x_extent, n)
    hit = _PHASE_CACHE.get(key)
    if hit is not None and hit[0] is mag:
        return hit[1]
    ph = _phase_uncached(mag, state, n)
    if len(_PHASE_CACHE) >= 4:
        _PHASE_CACHE.clear()
    ph.flags.writeable = False
    _PHASE_CACHE[key] = (mag, ph)
    return ph


def _phase_uncached(mag: MagneticData, state: PhaseGrid, n: int) -> np.ndarray:
    d = state.d
    T = _differences(n) * state.dx
    axes = [state.x_nodes] * d + [T] * d
    grids = np.meshgrid(*axes, indexing="ij")
    start = np.stack(grids[:d], axis=-1)
    delta = np.stack(grids[d:], axis=-1)
    eps = mag.eps
    integral = line_integral_A(mag, eps * start, eps * (start + delta))
    return np.exp(-1j * mag.lam / eps * integral)


def _band_indices(state: PhaseGrid, n: int):
    """Index arrays mapping (a..., t...) to the flat state pair (a, (a+t) mod n_s)."""
    d, ns = state.d, state.n
    a = np.arange(ns)
    t = _differences(n)
    A_idx = []
    B_idx = []
    for j in range(d):
        shape_a = [1] * (2 * d)
        shape_a[j] = ns
        shape_t = [1] * (2 * d)
        shape_t[d + j] = n
        aj = a.reshape(shape_a)
        tj = t.reshape(shape_t)
        A_idx.append(np.broadcast_to(aj, (ns,) * d + (n,) * d))
        B_idx.append(np.broadcast_to((aj + tj) % ns, (ns,) * d + (n,) * d))
    return A_idx, B_idx


def _symbol_at_midpoints(f: Symbol, eps: float, mids: np.ndarray) -> np.ndarray:
    """f(eps * m, xi) for every midpoint m per axis, shape (H..., xi..., r, c)."""
    grid = f.grid
    d = grid.d
    if f.func is not None:
        axes = [eps * mids] * d + [grid.xi_nodes] * d
        g = np.meshgrid(*axes, indexing="ij")
        X = np.stack(g[:d], axis=-1)
        XI = np.stack(g[d:], axis=-1)
        vals = np.asarray(f.func(X, XI), dtype=complex)
        return np.broadcast_to(vals, X.shape[:-1] + (f.n_out, f.n_in))
    E = fourier_eval_matrix(grid.n, grid.x_extent, eps * mids)
    out = f.values
    for j in range(d):
        out = np.moveaxis(np.tensordot(E, out, axes=([1], [j])), 0, j)
    return out


def kernel_band(f: Symbol, mag: MagneticData) -> np.ndarray:
    """Anti-diagonal band B[a..., t...] = K(a, a + t) of the kernel of Op^A(f).

    Indices: ``a`` over the state grid, ``t + n/2`` over the differences
    ``-n/2 <= t < n/2``; entries of K outside the band vanish.
    """
    grid = f.grid
    d, n = grid.d, grid.n
    eps = mag.eps
    state = grid.state_grid(eps)
    mids, offset = _midpoint_positions(grid, state)
    fm = _symbol_at_midpoints(f, eps, mids)

    # DFT over momentum axes, fhat[h, t] = (2 pi)^-1 dxi sum_k e^{-i t dx xi_k} f[h, k];
    # on the centred grids (n even) this is an FFT between alternating signs
    sign = (-1.0) ** np.arange(n)
    S = sign if d == 1 else np.multiply.outer(sign, sign)
    S = S.reshape(S.shape + (1, 1))
    axes = tuple(range(d, 2 * d))
    fhat = scipy.fft.fftn(fm * S, axes=axes, overwrite_x=True)
    fhat *= S * ((-1j) ** (n * d) / (n * grid.dx) ** d)

    # gather onto (a, t): midpoint index 2a + t + n/2
    t = _differences(n)
    ns = state.n
    a = np.arange(ns)
    idx = []
    for j in range(d):
        sh_a = [1] * (2 * d)
        sh_a[j] = ns
        sh_t = [1] * (2 * d)
        sh_t[d + j] = n
        idx.append(2 * a.reshape(sh_a) + t.reshape(sh_t) + offset)
    for j in range(d):
        sh_t = [1] * (2 * d)
        sh_t[d + j] = n
        idx.append(np.arange(n).reshape(sh_t))
    band = fhat[tuple(idx)]

    ph = _phase(mag, state, n)
    if ph is not None:
        band = band * ph[..., None, None]
    return band


def kernel_map(f: Symbol, mag: MagneticData) -> OperatorKernel:
    """Integral kernel of Op^A(f) on the state grid.

    K(x, y) = exp(-i lam/eps int_[eps x, eps y] A) (2 pi)^-d int e^{-i (y-x) eta} f(eps (x+y)/2, eta) d eta,
    with the eta-integral done as a DFT over the symbol's momentum nodes.
    """
    grid = f.grid
    d, n = grid.d, grid.n
    state = grid.state_grid(mag.eps)
    band = kernel_band(f, mag)
    K = np.zeros((state.n,) * (2 * d) + (f.n_out, f.n_in), dtype=complex)
    A_idx, B_idx = _band_indices(state, n)
    K[tuple(A_idx) + tuple(B_idx)] = band
    return OperatorKernel(grid, mag.eps, K)


def band_product(F: np.ndarray, G: np.ndarray, state: PhaseGrid, n: int) -> np.ndarray:
    """Band of the kernel of Int(F) Int(G), both given as bands of width n.

    P(a, t) = dx^d sum_s F(a, s) G(a + s, t - s); only differences inside the
    band are kept, which is all the Wigner transform reads.
    """
    d = state.d
    if F.shape[-1] != G.shape[-2]:
        from .errors import ComposabilityError
        raise ComposabilityError("fiber dimensions do not compose")
    r, m = F.shape[-2:]
    c = G.shape[-1]
    # fibers first so that every elementwise update runs over contiguous memory
    Ft = np.ascontiguousarray(np.moveaxis(F, (-2, -1), (0, 1)))
    Gt = np.ascontiguousarray(np.moveaxis(G, (-2, -1), (0, 1)))
    out = np.zeros((r, c) + F.shape[:2 * d], dtype=complex)
    ns = state.n
    h = n // 2
    a_axes = tuple(range(2, 2 + d))
    tt = np.arange(n) - h
    for s in np.ndindex(*(n,) * d):
        shift = [si - h for si in s]
        # band indices t whose partner difference (t - s), taken mod ns, is in the band
        t_idx, u_idx = [], []
        for v in shift:
            u = (tt - v + ns // 2) % ns - ns // 2
            ok = (u >= -h) & (u < h)
            t_idx.append(np.nonzero(ok)[0])
            u_idx.append(u[ok] + h)
        if any(len(ti) == 0 for ti in t_idx):
            continue
        Gs = Gt
        for j, ui in enumerate(u_idx):
            Gs = Gs.take(ui, axis=2 + d + j)
        Gs = np.roll(Gs, [-v for v in shift], axis=a_axes)
        Fs = Ft[(slice(None),) * (2 + d) + tuple(s)][(...,) + (None,) * d]
        for i in range(r):
            for j in range(c):
                acc = Fs[i, 0] * Gs[0, j]
                for k in range(1, m):
                    acc += Fs[i, k] * Gs[k, j]
                if d == 1:
                    out[i, j][:, t_idx[0]] += acc
                else:
                    sub = out[i, j]
                    sub[:, :, t_idx[0][:, None], t_idx[1][None, :]] += acc
    out *= state.dx ** d
    return np.moveaxis(out, (0, 1), (-2, -1))


def symbol_from_band(band: np.ndarray, grid: PhaseGrid, mag: MagneticData) -> Symbol:
    """Wigner transform of a kernel given by its band (see :func:`kernel_band`)."""
    d, n = grid.d, grid.n
    eps = mag.eps
    state = grid.state_grid(eps)
    ns, k = state.n, eps_multiplier(eps)
    ph = _phase(mag, state, n)
    if ph is not None:
        band = band * np.conj(ph)[..., None, None]
    else:
        band = np.array(band, dtype=complex)

    # re-index by midpoint: c = a + floor(t/2)
    t = _differences(n)
    for j in range(d):
        c = np.arange(ns)
        sh_c = [1] * (2 * d)
        sh_c[j] = ns
        sh_t = [1] * (2 * d)
        sh_t[d + j] = n
        src = (c.reshape(sh_c) - np.floor_divide(t, 2).reshape(sh_t)) % ns
        full = []
        for m in range(2 * d):
            if m == j:
                full.append(np.broadcast_to(src, band.shape[:2 * d]))
            else:
                sh = [1] * (2 * d)
                sh[m] = band.shape[m]
                full.append(np.broadcast_to(np.arange(band.shape[m]).reshape(sh), band.shape[:2 * d]))
        band = band[tuple(full)]
        # odd differences sit half a cell to the right: move them back onto nodes
        odd = (t % 2 == 1)
        sel = [slice(None)] * band.ndim
        sel[d + j] = odd
        band[tuple(sel)] = fourier_shift(band[tuple(sel)], -state.dx / 2, state.dx, axis=j)

    # macroscopic node x_i sits on state node k * i
    sel = [slice(None)] * band.ndim
    for j in range(d):
        sel[j] = slice(0, ns, k)
    P = band[tuple(sel)]

    # inverse DFT in t: f[i, xi_j] = dx^d sum_t e^{+i t dx xi_j} P[i, t]
    psi = np.exp(1j * np.outer(grid.xi_nodes, t * grid.dx)) * grid.dx
    out = P
    for j in range(d):
        out = np.moveaxis(np.tensordot(psi, out, axes=([1], [d + j])), 0, d + j)
    return Symbol(grid, out)


def wigner(K: OperatorKernel, mag: MagneticData) -> Symbol:
    """Magnetic Wigner transform: the symbol whose kernel is K (inverse of kernel_map)."""
    grid = K.grid
    if abs(mag.eps - K.eps) > 1e-12:
        raise ValueError("kernel and magnetic data use different eps")
    A_idx, B_idx = _band_indices(K.state, grid.n)
    band = K.values[tuple(A_idx) + tuple(B_idx)]
    return symbol_from_band(band, grid, mag)


def assemble(K: OperatorKernel) -> OperatorMatrix:
    """Matrix of Int(K) with the dy^d quadrature weight."""
    st = K.state
    d = st.d
    N = st.n ** d
    perm = tuple(range(d)) + (2 * d,) + tuple(range(d, 2 * d)) + (2 * d + 1,)
    M = np.transpose(K.values, perm).reshape(N * K.n_out, N * K.n_in) * st.dx ** d
    return OperatorMatrix(K.grid, K.eps, K.n_out, K.n_in, M)


def quantize(f: Symbol, mag: MagneticData) -> OperatorMatrix:
    """Op^A(f) as a dense matrix."""
    return assemble(kernel_map(f, mag))


def dequantize(F: OperatorMatrix, mag: MagneticData) -> Symbol:
    """Symbol of a matrix via the Wigner transform."""
    return wigner(F.kernel(), mag)


# ---------------------------------------------------------------------------
# Weyl system, gauge covariance, adjoint, commutators
# ---------------------------------------------------------------------------
def _state_positions(state: PhaseGrid) -> np.ndarray:
    return state.position_mesh()


def weyl_system_apply(X, psi: np.ndarray, grid: PhaseGrid, mag: MagneticData) -> np.ndarray:
    """(W^A(Y) psi)(x) = e^{-i lam/eps int_[eps x, eps x + eps y] A} e^{-i eps eta.(x + y/2)} psi(x + y).

    ``X = (y, eta)``; ``psi`` has shape (n_s,)*d + (fiber,) on the state grid.
    Shifts that are not multiples of dx use trigonometric interpolation.
    """
    y, eta = (np.atleast_1d(np.asarray(v, dtype=float)) for v in X)
    state = grid.state_grid(mag.eps)
    d = state.d
    out = np.asarray(psi, dtype=complex)
    for j in range(d):
        steps = y[j] / state.dx
        if abs(steps - round(steps)) < 1e-12:
            out = np.roll(out, -int(round(steps)), axis=j)
        else:
            out = fourier_shift(out, y[j], state.dx, axis=j)
    x = _state_positions(state)
    eps = mag.eps
    phase = np.exp(-1j * eps * np.sum(eta * (x + y / 2), axis=-1))
    if mag.kind != "zero" and mag.lam != 0:
        integral = line_integral_A(mag, eps * x, eps * (x + y))
        phase = phase * np.exp(-1j * mag.lam / eps * integral)
    return phase[..., None] * out


def weyl_composition_defect(X, Y, psi: np.ndarray, grid: PhaseGrid, mag: MagneticData) -> float:
    """|| W(X)W(Y)psi - e^{i eps/2 sigma(X,Y)} e^{-i lam/eps Flux(Q, Q+eps x, Q+eps x+eps y)} W(X+Y)psi ||.

    The flux sign follows from Stokes with B = dA: the two line-integral phases
    of W(X)W(Y) differ from that of W(X+Y) by the circulation around the triangle.
    """
    x, xi = (np.atleast_1d(np.asarray(v, dtype=float)) for v in X)
    y, eta = (np.atleast_1d(np.asarray(v, dtype=float)) for v in Y)
    lhs = weyl_system_apply((x, xi), weyl_system_apply((y, eta), psi, grid, mag), grid, mag)
    rhs = weyl_system_apply((x + y, xi + eta), psi, grid, mag)
    sigma = float(np.dot(xi, y) - np.dot(x, eta))
    state = grid.state_grid(mag.eps)
    q = mag.eps * _state_positions(state)
    if mag.d >= 2:
        flux = flux_triangle(mag, q, x, y)
    else:
        flux = np.zeros(q.shape[:-1])
    rhs = np.exp(1j * mag.eps / 2 * sigma) * np.exp(-1j * mag.lam / mag.eps * flux)[..., None] * rhs
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(psi), 1e-300))


def multiplication_operator(grid: PhaseGrid, mag: MagneticData, values_fn: Callable,
                            dim: int = 1) -> OperatorMatrix:
    """Diagonal operator psi(x) -> v(eps x) psi(x) on the state grid."""
    state = grid.state_grid(mag.eps)
    v = np.asarray(values_fn(mag.eps * _state_positions(state))).reshape(-1)
    M = np.kron(np.diag(v), np.eye(dim)).astype(complex)
    return OperatorMatrix(grid, mag.eps, dim, dim, M)


def gauge_covariance_defect(f: Symbol, mag: MagneticData, theta: Callable,
                            grad: Optional[Callable] = None) -> float:
    """Relative norm of Op^{A + eps d theta}(f) - e^{i lam theta(Q)} Op^A(f) e^{-i lam theta(Q)}."""
    lhs = quantize(f, mag.gauge_transformed(theta, grad))
    base = quantize(f, mag)
    state = f.grid.state_grid(mag.eps)
    th = np.asarray(theta(mag.eps * _state_positions(state))).reshape(-1)
    u_out = np.repeat(np.exp(1j * mag.lam * th), f.n_out)
    u_in = np.repeat(np.exp(-1j * mag.lam * th), f.n_in)
    rhs = u_out[:, None] * base.M * u_in[None, :]
    scale = max(operator_norm(base.M), 1e-300)
    return operator_norm(lhs.M - rhs) / scale


def adjoint_check(f: Symbol, mag: MagneticData) -> float:
    """||Op(f)^dagger - Op(f*)|| / ||Op(f)||."""
    F = quantize(f, mag)
    G = quantize(f.adjoint(), mag)
    scale = max(operator_norm(F.M), 1e-300)
    return operator_norm(F.M.conj().T - G.M) / scale


def position_operator(grid: PhaseGrid, mag: MagneticData, j: int, dim: int = 1) -> OperatorMatrix:
    """Q_j = Op^A(x_j)."""
    return quantize(Symbol.coordinate(grid, "x", j, dim), mag)


def momentum_operator(grid: PhaseGrid, mag: MagneticData, j: int, dim: int = 1) -> OperatorMatrix:
    """P^A_j = -i d_j - lam A_j(Q): FFT derivative on the state grid plus the potential.

    Quantizing the sampled coordinate xi_j instead would cut its slowly decaying
    kernel off at the band edge, which is visible for eps < 1.
    """
    state = grid.state_grid(mag.eps)
    N = state.n
    p = 2 * np.pi * np.fft.fftfreq(N, d=state.dx)
    if N % 2 == 0:
        p[N // 2] = 0.0
    D1 = np.fft.ifft(p[:, None] * np.fft.fft(np.eye(N), axis=0), axis=0)
    mats = [np.eye(N)] * state.d
    mats[j] = D1
    M = mats[0]
    for mat in mats[1:]:
        M = np.kron(M, mat)
    if mag.lam != 0 and mag.kind != "zero":
        a = np.asarray(mag.A(mag.eps * _state_positions(state)))[..., j].reshape(-1)
        M = M - mag.lam * np.diag(a)
    return OperatorMatrix(grid, mag.eps, dim, dim, np.kron(M, np.eye(dim)).astype(complex))


def _wrap(diff: np.ndarray, period: float) -> np.ndarray:
    """Minimal-image representative in [-period/2, period/2); the half period maps to 0."""
    w = np.mod(diff + period / 2, period) - period / 2
    w[np.isclose(np.abs(w), period / 2)] = 0.0
    return w


def _split(F: OperatorMatrix) -> tuple[np.ndarray, PhaseGrid]:
    state = F.grid.state_grid(F.eps)
    shape = (state.n,) * state.d
    return F.M.reshape(shape + (F.n_out,) + shape + (F.n_in,)), state


def _pair_weight(T: np.ndarray, w: np.ndarray, j: int, d: int) -> np.ndarray:
    """Multiply T[..., i_j, ..., r, ..., l_j, ..., c] by w[i_j, l_j]."""
    shape = [1] * (2 * d + 2)
    shape[j] = shape[d + 1 + j] = w.shape[0]
    return T * w.reshape(shape)


def position_commutator(F: OperatorMatrix, j: int) -> OperatorMatrix:
    """[Q_j, F] with minimal-image position differences on the periodic state grid."""
    T, state = _split(F)
    x = state.x_nodes
    w = F.eps * _wrap(x[:, None] - x[None, :], 2 * state.x_extent)
    C = _pair_weight(T, w, j, state.d)
    return F._like(C.reshape(F.M.shape), F.n_out, F.n_in)


def momentum_commutator(F: OperatorMatrix, mag: MagneticData, j: int) -> OperatorMatrix:
    """[P^A_j, F]: minimal-image momentum differences, minus lam [A_j(Q), F].

    The momentum space of the grid is a circle, so the plain sawtooth P would weigh
    pairs that straddle +-pi/dx by the full momentum range.
    """
    T, state = _split(F)
    d = state.d
    col = d + 1 + j
    That = np.fft.ifft(np.fft.fft(T, axis=j), axis=col)
    p = 2 * np.pi * np.fft.fftfreq(state.n, d=state.dx)
    w = _wrap(p[:, None] - p[None, :], 2 * np.pi / state.dx)
    C = np.fft.fft(np.fft.ifft(_pair_weight(That, w, j, d), axis=j), axis=col)
    if mag.lam != 0 and mag.kind != "zero":
        a = np.asarray(mag.A(mag.eps * _state_positions(state)))[..., j]
        shape_r = a.shape + (1,) + (1,) * d + (1,)
        shape_c = (1,) * d + (1,) + a.shape + (1,)
        C = C - mag.lam * (a.reshape(shape_r) - a.reshape(shape_c)) * T
    return F._like(C.reshape(F.M.shape), F.n_out, F.n_in)


def gaussian_state(grid: PhaseGrid, eps: float, width: Optional[float] = None,
                   center=None, momentum=None) -> np.ndarray:
    """Normalized Gaussian on the state grid.

    The default width sqrt(L dx / pi) makes the tails at the box edge and at the
    momentum cutoff pi/dx equally small.
    """
    state = grid.state_grid(eps)
    x = _state_positions(state)
    w = np.sqrt(state.x_extent * state.dx / np.pi) if width is None else width
    c = np.zeros(state.d) if center is None else np.asarray(center, float)
    k = np.zeros(state.d) if momentum is None else np.asarray(momentum, float)
    psi = np.exp(-np.sum((x - c) ** 2, axis=-1) / (2 * w ** 2) + 1j * x @ k)
    psi = psi.reshape(-1)
    return psi / np.sqrt(np.sum(np.abs(psi) ** 2) * state.dx ** state.d)


@dataclass
class CommutatorReport:
    """Defects of the canonical commutation relations on test states.

    ``pp`` is measured against i[P_1, P_2] = -eps lam B_12(Q) (B = dA);
    ``pp_coefficient`` is <psi, i[P_1, P_2] psi> / <psi, psi>.
    """

    qq: float
    pq: float
    pp: float
    pp_coefficient: float
    expected_pp: float
    window: float

    @property
    def max_defect(self) -> float:
        return max(self.qq, self.pq, self.pp)


def commutation_check(grid: PhaseGrid, mag: MagneticData, states=None,
                      window: float = 0.25) -> CommutatorReport:
    """Evaluate i[Q_j,Q_l], i[P_j,Q_l] - eps delta_jl and i[P_1,P_2] on Gaussian states.

    Defects are measured on the interior window |x_j| <= window * L_state.  For a
    non-periodic potential the straight-line phase of pairs that wrap around the
    torus is inconsistent, so rows near the box edge carry an artefact of the
    periodic discretization that says nothing about the relations themselves.
    """
    d = grid.d
    eps = mag.eps
    if states is None:
        states = [gaussian_state(grid, eps)]
    Q = [position_operator(grid, mag, j).M for j in range(d)]
    P = [momentum_operator(grid, mag, j).M for j in range(d)]
    qq = pq = pp = 0.0
    coeffs = []
    state = grid.state_grid(eps)
    pos = _state_positions(state).reshape(-1, d)
    mask = np.all(np.abs(pos) <= window * state.x_extent, axis=1)
    Bq = mag.B(eps * pos)
    for psi in states:
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        norm = np.linalg.norm(psi)
        for j in range(d):
            for l in range(d):
                c_qq = 1j * (Q[j] @ (Q[l] @ psi) - Q[l] @ (Q[j] @ psi))
                qq = max(qq, np.linalg.norm(c_qq[mask]) / norm)
                c_pq = 1j * (P[j] @ (Q[l] @ psi) - Q[l] @ (P[j] @ psi))
                target = eps * (j == l) * psi
                pq = max(pq, np.linalg.norm((c_pq - target)[mask]) / norm)
                if j < l:
                    c_pp = 1j * (P[j] @ (P[l] @ psi) - P[l] @ (P[j] @ psi))
                    target = -eps * mag.lam * Bq[:, j, l] * psi
                    pp = max(pp, np.linalg.norm((c_pp - target)[mask]) / norm)
                    w = psi * mask
                    coeffs.append(np.vdot(w, c_pp).real / np.vdot(w, psi).real)
    expected = -eps * mag.lam * mag.B0 if d == 2 else 0.0
    coef = coeffs[0] if coeffs else 0.0
    return CommutatorReport(float(qq), float(pq), float(pp), float(coef), float(expected), window)
