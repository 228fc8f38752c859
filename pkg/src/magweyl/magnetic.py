"""Magnetic fields, vector potentials, line integrals and flux triangles."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, MagWeylWarning

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS

# 7-point symmetric rule on the reference simplex (degree 5), weights sum to 1.
_r15 = np.sqrt(15.0)
_b1 = (6 + _r15) / 21
_b2 = (6 - _r15) / 21
_a1, _a2 = 1 - 2 * _b1, 1 - 2 * _b2
_TRI_POINTS = np.array([
    [1 / 3, 1 / 3],
    [_a1, _b1], [_b1, _a1], [_b1, _b1],
    [_a2, _b2], [_b2, _a2], [_b2, _b2],
])
_TRI_WEIGHTS = np.array([9 / 40] + [(155 + _r15) / 1200] * 3 + [(155 - _r15) / 1200] * 3)

KINDS = ("zero", "constant", "landau", "sampled")


@dataclass(frozen=True)
class MagneticData:
    """Field B = dA with B_jl = d_j A_l - d_l A_j, coupling ``lam`` and scale ``eps``.

    ``constant`` uses the symmetric gauge, ``landau`` uses A = (0, B0 x1).
    ``sampled`` wraps a user potential, either a callable or a sample table,
    valid on the box |x_j| <= ``domain``.
    """

    d: int
    kind: str = "zero"
    lam: float = 0.0
    eps: float = 1.0
    B0: float = 0.0
    A_func: Optional[Callable] = field(default=None, compare=False, repr=False)
    B_func: Optional[Callable] = field(default=None, compare=False, repr=False)
    domain: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown magnetic kind {self.kind!r}")
        if self.lam < 0:
            raise ValueError("coupling lambda must be >= 0")
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        if self.kind in ("constant", "landau") and self.d != 2:
            raise ValueError(f"kind {self.kind!r} needs d=2")
        if self.kind == "sampled" and self.A_func is None:
            raise ValueError("sampled kind needs a vector potential")

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, d: int, eps: float = 1.0) -> "MagneticData":
        return cls(d, "zero", 0.0, eps)

    @classmethod
    def constant(cls, B0: float, lam: float = 1.0, eps: float = 1.0) -> "MagneticData":
        return cls(2, "constant", lam, eps, B0)

    @classmethod
    def landau(cls, B0: float, lam: float = 1.0, eps: float = 1.0) -> "MagneticData":
        return cls(2, "landau", lam, eps, B0)

    @classmethod
    def from_potential(cls, d, A_func, B_func=None, lam=1.0, eps=1.0, domain=None):
        """General potential given as a vectorized callable ``A(x) -> (..., d)``."""
        return cls(d, "sampled", lam, eps, 0.0, A_func, B_func, domain)

    @classmethod
    def from_samples(cls, nodes: np.ndarray, A_samples: np.ndarray, lam=1.0, eps=1.0):
        """Potential tabulated on a tensor grid ``nodes`` (1-d array, same per axis).

        ``A_samples`` has shape (len(nodes),)*d + (d,); cubic splines interpolate.
        """
        from scipy.interpolate import RegularGridInterpolator

        A_samples = np.asarray(A_samples, dtype=float)
        d = A_samples.shape[-1]
        interp = RegularGridInterpolator((nodes,) * d, A_samples, method="cubic")
        half = float(min(-nodes[0], nodes[-1]))

        def A_func(x):
            x = np.asarray(x, dtype=float)
            flat = x.reshape(-1, d)
            return interp(flat).reshape(x.shape)

        return cls(d, "sampled", lam, eps, 0.0, A_func, None, half)

    def with_params(self, **kw) -> "MagneticData":
        return replace(self, **kw)

    def gauge_transformed(self, theta: Callable, grad: Optional[Callable] = None) -> "MagneticData":
        """A' = A + eps grad(theta); B is unchanged.

        ``grad`` may supply the exact gradient; otherwise finite differences are used.
        """
        eps = self.eps
        base = self
        grad_fn = grad if grad is not None else (lambda x: numerical_gradient(theta, x))

        def A_new(x):
            return base.A(x) + eps * np.asarray(grad_fn(x))

        return MagneticData(self.d, "sampled", self.lam, eps, 0.0, A_new,
                            lambda x: base.B(x), self.domain if self.kind == "sampled" else None)

    # evaluation ---------------------------------------------------------
    def A(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return 0.5 * self.B0 * np.stack([-x[..., 1], x[..., 0]], axis=-1)
        if self.kind == "landau":
            return np.stack([np.zeros_like(x[..., 0]), self.B0 * x[..., 0]], axis=-1)
        self._check_domain(x)
        return np.asarray(self.A_func(x), dtype=float)

    def B(self, x: np.ndarray) -> np.ndarray:
        """Antisymmetric field components, shape (..., d, d)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape + (self.d,))
        if self.d == 1 or self.kind == "zero":
            return out
        if self.kind in ("constant", "landau"):
            out[..., 0, 1] = self.B0
            out[..., 1, 0] = -self.B0
            return out
        if self.B_func is not None:
            return np.asarray(self.B_func(x), dtype=float)
        jac = numerical_jacobian(self.A, x)  # jac[..., l, j] = d_j A_l
        return np.swapaxes(jac, -1, -2) - jac

    @property
    def constant_field(self) -> bool:
        return self.kind in ("zero", "constant", "landau") or self.d == 1

    def _check_domain(self, x):
        if self.domain is not None and np.any(np.abs(x) > self.domain * (1 + 1e-12)):
            raise DomainError(
                f"segment leaves the sampled box |x| <= {self.domain:g}")

    def curl_defect(self, nodes: np.ndarray) -> float:
        """Relative mismatch between a finite-difference curl of A and B on ``nodes``."""
        if self.d == 1:
            return 0.0
        h = nodes[1] - nodes[0]
        grids = np.meshgrid(*([nodes] * self.d), indexing="ij")
        X = np.stack(grids, axis=-1)
        A = self.A(X)
        curl = np.zeros(X.shape[:-1] + (self.d, self.d))
        for j in range(self.d):
            for l in range(self.d):
                curl[..., j, l] = (np.gradient(A[..., l], h, axis=j, edge_order=2)
                                   - np.gradient(A[..., j], h, axis=l, edge_order=2))
        B = self.B(X)
        scale = max(np.max(np.abs(B)), 1.0)
        return float(np.max(np.abs(curl - B)) / scale)

    def to_dict(self) -> dict:
        return {"d": self.d, "kind": self.kind, "lambda": self.lam, "eps": self.eps, "B0": self.B0}


def numerical_gradient(func: Callable, x: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Fourth-order central difference gradient of a scalar callable."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    coeffs = [(1, 2 / 3), (2, -1 / 12)]
    out = np.zeros(x.shape)
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        acc = 0.0
        for k, c in coeffs:
            acc = acc + c * (np.asarray(func(x + k * e)) - np.asarray(func(x - k * e)))
        out[..., j] = acc / h
    return out


def numerical_jacobian(func: Callable, x: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """jac[..., l, j] = d_j func_l by eighth-order central differences."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    coeffs = [(1, 4 / 5), (2, -1 / 5), (3, 4 / 105), (4, -1 / 280)]
    cols = []
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        acc = 0.0
        for k, c in coeffs:
            acc = acc + c * (func(x + k * e) - func(x - k * e))
        cols.append(acc / h)
    return np.stack(cols, axis=-1)


def line_integral_A(mag: MagneticData, x, y, max_piece: float = 2.0) -> np.ndarray:
    """Integral of A along the straight segment [x, y].

    Composite 8-point Gauss-Legendre; pieces no longer than ``max_piece`` for
    general potentials (the builtin kinds are linear, one piece is exact).
    Broadcasts over leading axes of ``x`` and ``y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    if mag.kind == "zero":
        return np.zeros(x.shape[:-1])
    delta = y - x
    if mag.kind in ("constant", "landau"):
        # linear potential: the midpoint rule is exact
        return np.einsum("...d,...d->...", mag.A(x + delta / 2), delta)
    else:
        length = float(np.max(np.linalg.norm(delta, axis=-1))) if delta.size else 0.0
        pieces = max(1, int(np.ceil(length / max_piece)))
    total = np.zeros(x.shape[:-1])
    for p in range(pieces):
        t = (p + _GL_NODES) / pieces  # (8,)
        pts = x[..., None, :] + t[:, None] * delta[..., None, :]
        vals = np.einsum("...qd,...d->...q", mag.A(pts), delta)
        total = total + vals @ _GL_WEIGHTS / pieces
    return total


def flux_triangle(mag: MagneticData, q, x, y) -> np.ndarray:
    """Flux of B through the oriented triangle <q, q + eps x, q + eps x + eps y>."""
    q = np.asarray(q, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    q, x, y = np.broadcast_arrays(q, x, y)
    if mag.d == 1:
        warnings.warn("flux through a triangle vanishes identically in d=1", MagWeylWarning)
        return np.zeros(q.shape[:-1])
    if mag.kind == "zero":
        return np.zeros(q.shape[:-1])
    u = mag.eps * x
    v = mag.eps * (x + y)
    if mag.constant_field:
        return 0.5 * mag.B0 * (u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0])
    s, t = _TRI_POINTS[:, 0], _TRI_POINTS[:, 1]
    pts = q[..., None, :] + s[:, None] * u[..., None, :] + t[:, None] * v[..., None, :]
    Bv = mag.B(pts)  # (..., 7, d, d)
    integrand = np.einsum("...qjl,...j,...l->...q", Bv, u, v)
    return 0.5 * integrand @ _TRI_WEIGHTS
