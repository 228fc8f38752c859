"""Hörmander seminorms and ellipticity of matrix-valued symbols on the grid."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .grid import japanese
from .symbol import Symbol

# fourth-order first-derivative stencil: offsets and weights (divide by h)
_STENCIL = ((-2, 1 / 12), (-1, -2 / 3), (1, 2 / 3), (2, -1 / 12))
_REACH = 2


def _diff(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    out = np.zeros_like(values)
    for k, c in _STENCIL:
        out = out + c * np.roll(values, -k, axis=axis)
    return out / h


def symbol_derivative(f: Symbol, a, alpha) -> tuple[np.ndarray, np.ndarray]:
    """d_x^a d_xi^alpha f by iterated periodic 4th-order central differences.

    Returns the derivative samples and a boolean mask of the nodes whose
    stencils never crossed the periodic seam of the box.
    """
    grid = f.grid
    d = grid.d
    a = tuple(int(v) for v in np.broadcast_to(a, (d,)))
    alpha = tuple(int(v) for v in np.broadcast_to(alpha, (d,)))
    if sum(a) > 4 or sum(alpha) > 4 or min(a + alpha) < 0:
        raise ValueError("derivative orders must satisfy 0 <= |a|, |alpha| <= 4")
    vals = f.values
    valid = np.ones(grid.shape, dtype=bool)
    idx = np.arange(grid.n)
    for j, order in enumerate(a + alpha):
        if order == 0:
            continue
        h = grid.dx if j < d else grid.dxi
        for _ in range(order):
            vals = _diff(vals, j, h)
        reach = _REACH * order
        ok = (idx >= reach) & (idx < grid.n - reach)
        shape = [1] * (2 * d)
        shape[j] = grid.n
        valid = valid & ok.reshape(shape)
    return vals, valid


def hoermander_seminorm(f: Symbol, m: float, rho: float, delta: float, a, alpha) -> float:
    """sup <xi>^{-m + rho|alpha| - delta|a|} ||d_x^a d_xi^alpha f||_op over the grid.

    Nodes within the stencil reach of the periodic seam are left out: test
    symbols that grow in xi (xi_1, <xi>^2) are not periodic, and the seam
    would otherwise report a spurious jump.
    """
    grid = f.grid
    vals, valid = symbol_derivative(f, a, alpha)
    na = int(np.sum(a))
    nalpha = int(np.sum(alpha))
    _, XI = grid.mesh()
    weight = japanese(XI) ** (-m + rho * nalpha - delta * na)
    norms = np.linalg.norm(vals, ord=2, axis=(-2, -1)) * weight
    return float(np.max(norms[valid]))


@dataclass
class SeminormReport:
    """Estimated seminorms of a symbol, keyed by (a, alpha) multi-index pairs."""

    m: float
    rho: float
    delta: float
    entries: dict = field(default_factory=dict)

    def max_entry(self) -> float:
        return max(self.entries.values()) if self.entries else 0.0

    def to_rows(self) -> list[dict]:
        return [{"a": list(k[0]), "alpha": list(k[1]), "value": v} for k, v in self.entries.items()]


def _multi_indices(d: int, order: int):
    return [mi for mi in product(range(order + 1), repeat=d) if sum(mi) <= order]


def seminorm_report(f: Symbol, m: float, rho: float = 1.0, delta: float = 0.0,
                    max_order: int = 2) -> SeminormReport:
    """All seminorms with |a| + |alpha| <= max_order."""
    rep = SeminormReport(m, rho, delta)
    d = f.grid.d
    for a in _multi_indices(d, max_order):
        for alpha in _multi_indices(d, max_order - sum(a)):
            rep.entries[(a, alpha)] = hoermander_seminorm(f, m, rho, delta, a, alpha)
    return rep


@dataclass(frozen=True)
class EllipticityResult:
    elliptic: bool
    C: float


def ellipticity_check(f: Symbol, m: float, R: float, tol: float = 1e-12) -> EllipticityResult:
    """C = min over |xi| >= R of sigma_min(f(x, xi)) / <xi>^m; elliptic iff C > tol."""
    grid = f.grid
    _, XI = grid.mesh()
    r = np.sqrt(np.sum(XI ** 2, axis=-1))
    region = r >= R
    if not np.any(region):
        raise ValueError(f"no test region: |xi| >= {R} lies outside the momentum grid")
    smin = np.linalg.svd(f.values[region], compute_uv=False)[..., -1]
    C = float(np.min(smin / japanese(XI[region]) ** m))
    return EllipticityResult(C > tol, C)
