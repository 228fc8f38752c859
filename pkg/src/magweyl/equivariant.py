"""Equivariant layer in one dimension: lattice, group actions, Zak transform,
Bloch fibers, equivariant symbols and their quantization.

Fibers use the plane-wave basis e^{i q_m y}, q_m = m e*, |m| <= M.  The action
e^{i gamma* y} of gamma* = j e* is the cyclic shift of mode labels by j, which
is exactly what multiplication by e^{i gamma* y} does on 2M+1 torus samples;
it is an exact unitary group representation.  Truncation therefore only shows
up in the symbols, at the modes that wrap around.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import CapabilityError, ComposabilityError, CoverError
from .grid import PhaseGrid
from .magnetic import MagneticData
from .moyal import weyl_product_exact
from .funcalc import moyal_resolvent
from .quantizer import quantize
from .symbol import Symbol


def _bracket(t) -> np.ndarray:
    """<t> = sqrt(1 + t^2) elementwise."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(1.0 + t * t)


# ---------------------------------------------------------------------------
# lattice
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Lattice:
    """Gamma = a Z with Gamma* = e* Z, e* = 2 pi / a.

    ``n_k`` Brillouin-zone nodes, ``n_y`` torus nodes, ``N_c`` (odd) momentum
    cells in the cover used by equivariant quantization.
    """

    a: float = 1.0
    n_k: int = 16
    n_y: int = 32
    N_c: int = 5

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("lattice constant must be positive")
        if self.n_k < 2 or self.n_k % 2:
            raise ValueError("n_k must be even and >= 2")
        if self.N_c < 1 or self.N_c % 2 == 0:
            raise ValueError("N_c must be odd")

    @property
    def d(self) -> int:
        return 1

    @property
    def e_star(self) -> float:
        return 2 * np.pi / self.a

    @property
    def duality_defect(self) -> float:
        return abs(self.a * self.e_star - 2 * np.pi)

    @property
    def bz_nodes(self) -> np.ndarray:
        """k in [-e*/2, e*/2)."""
        return self.e_star * (np.arange(self.n_k) - self.n_k // 2) / self.n_k

    @property
    def y_nodes(self) -> np.ndarray:
        return self.a * np.arange(self.n_y) / self.n_y

    @property
    def cells(self) -> np.ndarray:
        """Offsets c of the cover cells; cell c holds k + c e*, k in BZ."""
        h = self.N_c // 2
        return np.arange(-h, h + 1)

    def cover_grid(self) -> PhaseGrid:
        """PhaseGrid whose momentum nodes are the N_c translated Brillouin zones."""
        return PhaseGrid(1, self.N_c * self.n_k, self.n_k * self.a / 2)

    def cell_slice(self, c: int) -> slice:
        start = (c + self.N_c // 2) * self.n_k
        return slice(start, start + self.n_k)


# ---------------------------------------------------------------------------
# group actions
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class GroupAction:
    """gamma* = j e* -> tau(j), with optional mode labels and norm weights.

    The operator norm of tau(j) is ||W tau(j) W^-1||_2 for the diagonal
    weights W (identity when absent).
    """

    dim: int
    matrix: Callable[[int], np.ndarray]
    e_star: float
    modes: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    def __call__(self, j: int) -> np.ndarray:
        return self.matrix(int(j))

    def norm(self, j: int) -> float:
        T = self(j)
        if self.weights is not None:
            T = (self.weights[:, None] * T) / self.weights[None, :]
        return float(np.linalg.norm(T, 2))

    def valid(self, j: int, margin: int) -> np.ndarray:
        """Fiber indices where the shift by j neither wraps nor touches the margin."""
        if self.modes is None:
            return np.ones(self.dim, dtype=bool)
        M = int(np.max(np.abs(self.modes)))
        return (np.abs(self.modes) <= M - margin) & (np.abs(self.modes - j) <= M - margin)

    @classmethod
    def mode_shift(cls, M: int, lat: Lattice, sobolev: float = 0.0) -> "GroupAction":
        """e^{i gamma* y} on 2M+1 modes, normed in H^sobolev(T)."""
        D = 2 * M + 1
        modes = np.arange(-M, M + 1)
        eye = np.eye(D)

        def mat(j):
            return np.roll(eye, j, axis=0).astype(complex)

        w = _bracket(lat.e_star * modes) ** sobolev
        return cls(D, mat, lat.e_star, modes, w)

    @classmethod
    def trivial(cls, dim: int, lat: Lattice) -> "GroupAction":
        eye = np.eye(dim, dtype=complex)
        return cls(dim, lambda j: eye, lat.e_star)

    @classmethod
    def scalar(cls, fn: Callable[[float], float], dim: int, lat: Lattice) -> "GroupAction":
        """tau(gamma*) = fn(gamma*) Id (not a representation; used for order fits)."""
        eye = np.eye(dim, dtype=complex)
        return cls(dim, lambda j: fn(j * lat.e_star) * eye, lat.e_star)


@dataclass(frozen=True)
class OrderEstimate:
    q: float
    C: float


def tau_order_estimate(tau: GroupAction, js: Optional[Sequence[int]] = None) -> OrderEstimate:
    """Least-squares fit of log ||tau(gamma*)|| = log C + q log <gamma*>."""
    if js is None:
        top = int(np.max(np.abs(tau.modes))) if tau.modes is not None else 8
        js = [j for j in range(-top, top + 1) if j != 0]
    js = np.asarray(list(js))
    x = np.log(_bracket(js * tau.e_star))
    y = np.log([tau.norm(j) for j in js])
    A = np.stack([np.ones_like(x), x], axis=1)
    (logC, q), *_ = np.linalg.lstsq(A, y, rcond=None)
    return OrderEstimate(float(q), float(np.exp(logC)))


# ---------------------------------------------------------------------------
# Zak transform
# ---------------------------------------------------------------------------
def _zak_phases(lat: Lattice, k: np.ndarray) -> np.ndarray:
    gam = lat.a * np.arange(lat.n_k)
    pos = lat.y_nodes[None, :] + gam[:, None]  # (cell, y)
    return np.exp(-1j * k[:, None, None] * pos[None])  # (k, cell, y)


def zak_transform(Psi: np.ndarray, lat: Lattice, k: Optional[np.ndarray] = None,
                  normalized: bool = True) -> np.ndarray:
    """(Z Psi)(k, y) = sum_gamma e^{-i k (y + gamma)} Psi(y + gamma).

    ``Psi[c, j]`` holds Psi(y_j + c a) on n_k cells with periodic closure.
    With ``normalized`` the sum carries n_k^(-1/2) so Z is unitary on the
    BZ nodes.  ``k`` defaults to the BZ nodes; any other k evaluates the same
    sum.
    """
    Psi = np.asarray(Psi)
    if Psi.shape[:2] != (lat.n_k, lat.n_y):
        raise ValueError(f"expected samples of shape ({lat.n_k}, {lat.n_y}), got {Psi.shape[:2]}")
    k = lat.bz_nodes if k is None else np.atleast_1d(np.asarray(k, dtype=float))
    ph = _zak_phases(lat, k)
    out = np.einsum("kcy,cy...->ky...", ph, Psi)
    return out / np.sqrt(lat.n_k) if normalized else out


def inverse_zak_transform(psi: np.ndarray, lat: Lattice) -> np.ndarray:
    """Adjoint of the normalized transform on the BZ nodes."""
    psi = np.asarray(psi)
    if psi.shape[:2] != (lat.n_k, lat.n_y):
        raise ValueError(f"expected samples of shape ({lat.n_k}, {lat.n_y}), got {psi.shape[:2]}")
    ph = _zak_phases(lat, lat.bz_nodes)
    return np.einsum("kcy,ky...->cy...", ph.conj(), psi) / np.sqrt(lat.n_k)


# ---------------------------------------------------------------------------
# Bloch fibers
# ---------------------------------------------------------------------------
def _toeplitz(coeffs: Optional[Mapping[int, complex]], M: int) -> np.ndarray:
    D = 2 * M + 1
    T = np.zeros((D, D), dtype=complex)
    if not coeffs:
        return T
    modes = np.arange(-M, M + 1)
    diff = modes[:, None] - modes[None, :]
    for p, c in coeffs.items():
        T[diff == p] = c
    return T


def fiber_operator(lat: Lattice, V_coeffs: Optional[Mapping[int, complex]], k,
                   M: int, A0_coeffs: Optional[Mapping[int, complex]] = None) -> np.ndarray:
    """H_per(k) = (-i d/dy + k - A0)^2 + V on the modes |m| <= M.

    Periodic functions are given as Fourier coefficients {p: c_p} of
    sum_p c_p e^{i p e* y}.  ``k`` may be an array; the result then carries
    the matrices on its last two axes.
    """
    k = np.asarray(k, dtype=float)
    q = lat.e_star * np.arange(-M, M + 1)
    V = _toeplitz(V_coeffs, M)
    if A0_coeffs:
        A = _toeplitz(A0_coeffs, M)
        P = (q[None, :] + k[..., None])[..., None] * np.eye(2 * M + 1)
        Pi = P - A
        return Pi @ Pi + V
    return np.einsum("...m,mn->...mn", (q + k[..., None]) ** 2, np.eye(2 * M + 1)) + V


def reference_bands(V: Callable[[np.ndarray], np.ndarray], lat: Lattice, k: float,
                    n_grid: int = 256, n_bands: int = 1) -> np.ndarray:
    """Lowest Bloch eigenvalues by eighth-order finite differences on the torus.

    Independent of the plane-wave fiber: acts on periodic u with
    -u'' - 2ik u' + k^2 u + V u on an equispaced grid.
    """
    h = lat.a / n_grid
    y = h * np.arange(n_grid)
    c1 = [4 / 5, -1 / 5, 4 / 105, -1 / 280]
    c2 = [8 / 5, -1 / 5, 8 / 315, -1 / 560]
    D1 = np.zeros((n_grid, n_grid))
    D2 = -205 / 72 * np.eye(n_grid)
    idx = np.arange(n_grid)
    for s, (a1, a2) in enumerate(zip(c1, c2), start=1):
        for sign in (1, -1):
            J = (idx + sign * s) % n_grid
            D1[idx, J] += sign * a1
            D2[idx, J] += a2
    D1 /= h
    D2 /= h ** 2
    H = -D2 - 2j * k * D1 + k ** 2 * np.eye(n_grid) + np.diag(V(y))
    return np.linalg.eigvalsh(0.5 * (H + H.conj().T))[:n_bands]


# ---------------------------------------------------------------------------
# equivariant symbols
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class EquivariantSymbol:
    """f(r, k - gamma*) = tau_out(gamma*) f(r, k) tau_in(gamma*)^-1 on the cover grid."""

    symbol: Symbol
    lattice: Lattice
    tau_out: GroupAction
    tau_in: GroupAction
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        g = self.symbol.grid
        ref = self.lattice.cover_grid()
        if (g.d, g.n) != (ref.d, ref.n) or not np.isclose(g.x_extent, ref.x_extent):
            raise ValueError("equivariant symbols live on the lattice cover grid")
        if (self.symbol.n_out, self.symbol.n_in) != (self.tau_out.dim, self.tau_in.dim):
            raise ComposabilityError("fiber dimensions do not match the group actions")

    def like(self, symbol: Symbol, tau_out=None, tau_in=None) -> "EquivariantSymbol":
        return EquivariantSymbol(symbol, self.lattice, tau_out or self.tau_out, tau_in or self.tau_in)


def bloch_symbol(lat: Lattice, V_coeffs: Optional[Mapping[int, complex]],
                 phi: Optional[Callable[[np.ndarray], np.ndarray]], M: int,
                 A0_coeffs: Optional[Mapping[int, complex]] = None) -> EquivariantSymbol:
    """h(r, k) = H_per(k) + phi(r) Id, from H^2 (in) to L^2 (out) mode spaces."""
    grid = lat.cover_grid()
    D = 2 * M + 1
    eye = np.eye(D)

    def func(x, xi):
        h = fiber_operator(lat, V_coeffs, xi[..., 0], M, A0_coeffs)
        if phi is not None:
            h = h + np.asarray(phi(x[..., 0]))[..., None, None] * eye
        return h

    sym = Symbol.from_function(grid, func)
    return EquivariantSymbol(sym, lat, GroupAction.mode_shift(M, lat, 0.0),
                             GroupAction.mode_shift(M, lat, 2.0))


def equivariance_defect(F: EquivariantSymbol, margin: int = 1, edge_cells: int = 0) -> float:
    """max ||f(r, k - gamma*) - tau_out f(r, k) tau_in^-1|| / ||f(r, k)||.

    Taken over node pairs k, k - gamma* that both lie in the cover minus
    ``edge_cells`` cells at each end, and over fiber entries that stay
    ``margin`` modes away from the truncation under the shift.
    """
    lat = F.lattice
    vals = F.symbol.values
    n = vals.shape[1]
    lo = edge_cells * lat.n_k
    hi = n - edge_cells * lat.n_k
    worst = 0.0
    for j in range(-(lat.N_c - 1), lat.N_c):
        if j == 0:
            continue
        src = np.arange(max(lo, lo + j * lat.n_k), min(hi, hi + j * lat.n_k))
        if src.size == 0:
            continue
        dst = src - j * lat.n_k
        rows = F.tau_out.valid(j, margin)
        cols = F.tau_in.valid(j, margin)
        if not rows.any() or not cols.any():
            continue
        To, Ti = F.tau_out(j), F.tau_in(-j)
        lhs = vals[:, dst]
        rhs = To @ vals[:, src] @ Ti
        diff = (lhs - rhs)[..., rows, :][..., cols]
        num = np.linalg.norm(diff, 2, axis=(-2, -1))
        den = np.linalg.norm(vals[:, src], 2, axis=(-2, -1))
        ratio = num / np.where(den > 0, den, 1.0)
        worst = max(worst, float(ratio.max()))
    return worst


def growth_exponent(F: EquivariantSymbol, edge_cells: int = 0) -> OrderEstimate:
    """Fit sup_r ||W_out f(r, gamma*) W_in^-1|| = C <gamma*>^q over cell centres gamma* != 0."""
    lat = F.lattice
    wo = F.tau_out.weights if F.tau_out.weights is not None else np.ones(F.tau_out.dim)
    wi = F.tau_in.weights if F.tau_in.weights is not None else np.ones(F.tau_in.dim)
    xi = F.symbol.grid.xi_nodes
    centre = lat.n_k // 2
    xs, ys = [], []
    for c in lat.cells:
        if c == 0 or abs(c) > lat.N_c // 2 - edge_cells:
            continue
        i = lat.cell_slice(int(c)).start + centre
        blk = F.symbol.values[:, i]
        W = (wo[:, None] * blk) / wi[None, :]
        xs.append(np.log(_bracket(xi[i])))
        ys.append(np.log(np.linalg.norm(W, 2, axis=(-2, -1)).max()))
    if len(xs) < 2:
        raise ValueError("need at least two cells for a growth fit")
    A = np.stack([np.ones(len(xs)), xs], axis=1)
    (logC, q), *_ = np.linalg.lstsq(A, np.array(ys), rcond=None)
    return OrderEstimate(float(q), float(np.exp(logC)))


# ---------------------------------------------------------------------------
# equivariant quantization
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class EquivariantOperator:
    """Matrix on L^2(BZ nodes, C^n_in) -> L^2(BZ nodes, C^n_out), k-major, fiber-minor."""

    lattice: Lattice
    n_out: int
    n_in: int
    M: np.ndarray

    def __matmul__(self, other):
        if isinstance(other, EquivariantOperator):
            if self.n_in != other.n_out:
                raise ComposabilityError("fiber dimensions do not compose")
            return EquivariantOperator(self.lattice, self.n_out, other.n_in, self.M @ other.M)
        return self.M @ other


def _momentum_unitary(grid: PhaseGrid) -> np.ndarray:
    """psi_hat(p_l) = N^-1/2 sum_a e^{-i p_l x_a} psi(x_a), p_l the centred nodes."""
    x = grid.x_nodes
    p = grid.xi_nodes
    return np.exp(-1j * np.outer(p, x)) / np.sqrt(grid.n)


def equivariant_extension(psi: np.ndarray, lat: Lattice, tau: GroupAction) -> np.ndarray:
    """BZ vector (n_k, D) -> cover vector (N_c n_k, D) with psi(k - gamma*) = tau(gamma*) psi(k)."""
    blocks = [psi @ tau(-int(c)).T for c in lat.cells]
    return np.concatenate(blocks, axis=0)


def equivariant_quantize(F: EquivariantSymbol, mag: Optional[MagneticData] = None,
                         cover_tol: float = 1e-10) -> EquivariantOperator:
    """Op^A_eq(f) on the Brillouin zone.

    Op^A(f) on the cover is taken to the momentum representation, fed with
    equivariant extensions of BZ vectors and read back on the central cell.
    The outermost cells act as buffers: if the central rows couple to them
    beyond ``cover_tol`` (relative) the cover is too small.
    """
    lat = F.lattice
    if mag is None:
        mag = MagneticData.zero(1)
    if mag.d != 1:
        raise CapabilityError("the equivariant layer is one-dimensional")
    if not np.isclose(mag.eps, 1.0):
        raise CapabilityError("equivariant quantization needs eps = 1 so state momenta are symbol nodes")
    grid = F.symbol.grid
    Do, Di = F.symbol.n_out, F.symbol.n_in
    Op = quantize(F.symbol, mag).M
    U = _momentum_unitary(grid)
    N = grid.n
    Op4 = Op.reshape(N, Do, N, Di)
    Opp = np.einsum("pa,aibj,qb->piqj", U, Op4, U.conj(), optimize=True)
    centre = lat.cell_slice(0)
    rows = Opp[centre]  # (n_k, Do, N, Di)
    if lat.N_c > 1:
        outer = np.r_[0:lat.n_k, N - lat.n_k:N]
        leak = np.linalg.norm(rows[:, :, outer])
        total = max(np.linalg.norm(rows), 1e-300)
        if leak > cover_tol * total:
            raise CoverError(f"central cell couples to the outermost cells ({leak / total:.2e}); increase N_c")
    out = np.zeros((lat.n_k, Do, lat.n_k, Di), dtype=complex)
    for c in lat.cells:
        blk = rows[:, :, lat.cell_slice(int(c))]  # (n_k, Do, n_k, Di)
        out += np.einsum("aibj,jl->aibl", blk, F.tau_in(-int(c)))
    return EquivariantOperator(lat, Do, Di, out.reshape(lat.n_k * Do, lat.n_k * Di))


def translation_oracle(lat: Lattice, phi_coeffs: Mapping[int, complex], tau: GroupAction,
                       eps: float = 1.0) -> EquivariantOperator:
    """phi(R), R = i eps d/dk, for phi(r) = sum_p c_p e^{i p pi r / L} on the cover box.

    e^{i w R} psi(k) = psi(k - eps w); with w = p pi / L and eps = 1 the shift is
    p momentum nodes, so the operator is a sum of node translations of the
    equivariant extension.
    """
    if not np.isclose(eps, 1.0):
        raise CapabilityError("the translation oracle needs eps = 1")
    D = tau.dim
    n_k = lat.n_k
    N = lat.N_c * n_k
    out = np.zeros((n_k, D, n_k, D), dtype=complex)
    centre = lat.cell_slice(0).start
    for p, c in phi_coeffs.items():
        for a in range(n_k):
            src = centre + a - p
            cell, b = divmod(src, n_k)
            cell -= lat.N_c // 2
            if not 0 <= src < N:
                raise CoverError("translation leaves the cover")
            # psi(k_b + cell e*) = tau(-cell) psi(k_b)
            out[a, :, b, :] += c * tau(-cell)
    return EquivariantOperator(lat, D, D, out.reshape(n_k * D, n_k * D))


@dataclass(frozen=True)
class ProductCheck:
    defect_f: float
    defect_g: float
    defect_product: float
    intertwining: Optional[float]
    growth: Optional[OrderEstimate]


def equivariant_product(F: EquivariantSymbol, G: EquivariantSymbol,
                        mag: Optional[MagneticData] = None) -> EquivariantSymbol:
    if F.tau_in.dim != G.tau_out.dim:
        raise ComposabilityError("fiber dimensions do not compose")
    if mag is None:
        mag = MagneticData.zero(1)
    P = weyl_product_exact(F.symbol, G.symbol, mag)
    return EquivariantSymbol(P, F.lattice, F.tau_out, G.tau_in)


def _interior_modes(tau: GroupAction, margin: int) -> np.ndarray:
    if tau.modes is None:
        return np.ones(tau.dim, dtype=bool)
    modes = np.abs(np.asarray(tau.modes))
    return modes <= modes.max() - margin


def equivariant_product_check(F: EquivariantSymbol, G: EquivariantSymbol,
                              mag: Optional[MagneticData] = None, margin: int = 1,
                              edge_cells: int = 1, intertwining: bool = False,
                              growth: bool = False) -> ProductCheck:
    """Equivariance defects of f, g and f # g, optionally the operator intertwining
    ||Op_eq(f) Op_eq(g) - Op_eq(f # g)|| / ||Op_eq(f # g)|| and the growth fit of f # g."""
    P = equivariant_product(F, G, mag)
    inter = None
    if intertwining:
        A = equivariant_quantize(F, mag).M @ equivariant_quantize(G, mag).M
        B = equivariant_quantize(P, mag).M
        # truncating the intermediate modes only disturbs the outermost ones
        rows = np.tile(_interior_modes(P.tau_out, margin), F.lattice.n_k)
        cols = np.tile(_interior_modes(P.tau_in, margin), F.lattice.n_k)
        A, B = A[np.ix_(rows, cols)], B[np.ix_(rows, cols)]
        inter = float(np.linalg.norm(A - B, 2) / max(np.linalg.norm(B, 2), 1e-300))
    return ProductCheck(equivariance_defect(F, margin, edge_cells),
                        equivariance_defect(G, margin, edge_cells),
                        equivariance_defect(P, margin, edge_cells),
                        inter, growth_exponent(P, edge_cells) if growth else None)


def equivariant_resolvent(H: EquivariantSymbol, z: complex,
                          mag: Optional[MagneticData] = None) -> EquivariantSymbol:
    """(h - z)^(-1)# with the in/out actions exchanged."""
    if H.tau_out.dim != H.tau_in.dim:
        raise ComposabilityError("resolvents need square fibers")
    if mag is None:
        mag = MagneticData.zero(1)
    R = moyal_resolvent(H.symbol, z, mag)
    return EquivariantSymbol(R, H.lattice, H.tau_in, H.tau_out)


# ---------------------------------------------------------------------------
# unit-cell identifications
# ---------------------------------------------------------------------------
def cell_unitary(psi: np.ndarray, j: int, j_tilde: int, tau: GroupAction) -> np.ndarray:
    """U_{gamma*, gamma~*}: the representative on BZ - gamma~* to the one on BZ - gamma*.

    (U psi)(k) = tau(gamma~* - gamma*)^-1 psi(k + gamma* - gamma~*); on the node
    grid the cells have identical node sets, so only the fiber map acts.
    ``psi`` has shape (n_k, D).
    """
    T = tau(int(j) - int(j_tilde))  # tau(gamma~* - gamma*)^-1 = tau(gamma* - gamma~*)
    return np.asarray(psi) @ T.T


def cell_norm(psi: np.ndarray, j: int, tau: GroupAction, dk: float = 1.0) -> float:
    """Norm of h_{gamma*}: ( int_{BZ - gamma*} ||tau(gamma*)^-1 psi(k)||^2 dk )^(1/2).

    With weights on tau the fiber norm is the weighted one.
    """
    v = np.asarray(psi) @ tau(-int(j)).T
    if tau.weights is not None:
        v = v * tau.weights
    return float(np.sqrt(dk * np.sum(np.abs(v) ** 2)))
