"""Matrix-valued symbols sampled on a phase-space grid."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ComposabilityError
from .grid import PhaseGrid, japanese


@dataclass(frozen=True, eq=False)
class Symbol:
    """Samples ``values[x..., xi..., row, col]`` of f : T*R^d -> B(C^n_in, C^n_out).

    ``func`` optionally keeps the exact callable ``func(x, xi) -> (..., n_out, n_in)``
    so quantization can evaluate off-grid points without interpolation.
    """

    grid: PhaseGrid
    values: np.ndarray
    func: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape[:-2] != self.grid.shape or v.ndim != 2 * self.grid.d + 2:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("symbol values must be finite")
        object.__setattr__(self, "values", v)

    # constructors -------------------------------------------------------
    @classmethod
    def from_function(cls, grid: PhaseGrid, func: Callable, keep: bool = True) -> "Symbol":
        """Sample ``func(x, xi)``; x and xi carry the coordinate on their last axis."""
        X, XI = grid.mesh()
        vals = np.asarray(func(X, XI), dtype=complex)
        return cls(grid, vals, func if keep else None)

    @classmethod
    def scalar(cls, grid: PhaseGrid, func: Callable, dim: int = 1, keep: bool = True) -> "Symbol":
        """Scalar function times the identity on C^dim."""
        eye = np.eye(dim)

        def wrapped(x, xi):
            return np.asarray(func(x, xi))[..., None, None] * eye

        return cls.from_function(grid, wrapped, keep)

    @classmethod
    def constant(cls, grid: PhaseGrid, matrix) -> "Symbol":
        M = np.atleast_2d(np.asarray(matrix, dtype=complex))

        def func(x, xi):
            return np.broadcast_to(M, x.shape[:-1] + M.shape).astype(complex)

        return cls.from_function(grid, func)

    @classmethod
    def identity(cls, grid: PhaseGrid, dim: int = 1) -> "Symbol":
        return cls.constant(grid, np.eye(dim))

    @classmethod
    def coordinate(cls, grid: PhaseGrid, axis: str, j: int = 0, dim: int = 1) -> "Symbol":
        """Coordinate function x_j (``axis='x'``) or xi_j (``axis='xi'``)."""
        if axis == "x":
            return cls.scalar(grid, lambda x, xi: x[..., j], dim)
        if axis == "xi":
            return cls.scalar(grid, lambda x, xi: xi[..., j], dim)
        raise ValueError("axis must be 'x' or 'xi'")

    @classmethod
    def gaussian(cls, grid: PhaseGrid, width: float = 1.0, center=(0.0, 0.0),
                 matrix=None) -> "Symbol":
        """exp(-(|x-x0|^2 + |xi-xi0|^2) / (2 width^2)) times ``matrix`` (default 1x1)."""
        M = np.eye(1) if matrix is None else np.atleast_2d(np.asarray(matrix, dtype=complex))
        x0, xi0 = center

        def func(x, xi):
            r2 = np.sum((x - x0) ** 2, axis=-1) + np.sum((xi - xi0) ** 2, axis=-1)
            return np.exp(-r2 / (2 * width ** 2))[..., None, None] * M

        return cls.from_function(grid, func)

    @classmethod
    def harmonic(cls, grid: PhaseGrid, dim: int = 1) -> "Symbol":
        """|x|^2 + |xi|^2 times the identity."""
        return cls.scalar(grid, lambda x, xi: np.sum(x ** 2, axis=-1) + np.sum(xi ** 2, axis=-1), dim)

    @classmethod
    def japanese_power(cls, grid: PhaseGrid, m: float, dim: int = 1) -> "Symbol":
        return cls.scalar(grid, lambda x, xi: japanese(xi) ** m, dim)

    # basic properties ---------------------------------------------------
    @property
    def n_out(self) -> int:
        return self.values.shape[-2]

    @property
    def n_in(self) -> int:
        return self.values.shape[-1]

    @property
    def d(self) -> int:
        return self.grid.d

    def composable(self, other: "Symbol") -> bool:
        """True when ``self`` can act after ``other``."""
        return self.n_in == other.n_out and self.grid == other.grid

    def _check_same(self, other: "Symbol"):
        if self.grid != other.grid:
            raise ValueError("symbols live on different grids")
        if (self.n_out, self.n_in) != (other.n_out, other.n_in):
            raise ComposabilityError("fiber shapes differ")

    # algebra ------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Symbol):
            self._check_same(other)
            func = _combine(self.func, other.func, lambda a, b: a + b)
            return Symbol(self.grid, self.values + other.values, func)
        return self + Symbol.constant(self.grid, other * np.eye(self.n_out)) \
            if np.isscalar(other) else NotImplemented

    __radd__ = __add__

    def __neg__(self):
        func = None if self.func is None else (lambda x, xi, f=self.func: -f(x, xi))
        return Symbol(self.grid, -self.values, func)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        func = None if self.func is None else (lambda x, xi, f=self.func: c * f(x, xi))
        return Symbol(self.grid, c * self.values, func)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def __matmul__(self, other: "Symbol") -> "Symbol":
        """Pointwise operator product (x, xi) -> f(x, xi) g(x, xi)."""
        if not self.composable(other):
            raise ComposabilityError(
                f"cannot compose fibers {self.n_out}x{self.n_in} after {other.n_out}x{other.n_in}")
        func = _combine(self.func, other.func, lambda a, b: a @ b)
        return Symbol(self.grid, self.values @ other.values, func)

    def adjoint(self) -> "Symbol":
        """Pointwise fiber adjoint f*(x, xi) = f(x, xi)^dagger."""
        func = None if self.func is None else (
            lambda x, xi, f=self.func: np.conj(np.swapaxes(f(x, xi), -1, -2)))
        return Symbol(self.grid, np.conj(np.swapaxes(self.values, -1, -2)), func)

    def pointwise_inverse(self) -> "Symbol":
        func = None if self.func is None else (lambda x, xi, f=self.func: np.linalg.inv(f(x, xi)))
        return Symbol(self.grid, np.linalg.inv(self.values), func)

    def map_values(self, fn: Callable) -> "Symbol":
        """New symbol from ``fn(values)`` (drops the exact callable)."""
        return Symbol(self.grid, fn(self.values))

    def without_func(self) -> "Symbol":
        return Symbol(self.grid, self.values)

    def evaluate(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """Exact values when a callable is attached, otherwise an error."""
        if self.func is None:
            raise ValueError("symbol has no callable; use grid values")
        return np.asarray(self.func(x, xi), dtype=complex)

    # norms --------------------------------------------------------------
    def sup_norm(self, mask: Optional[np.ndarray] = None) -> float:
        """max over grid of the spectral norm of the fiber matrix."""
        norms = fiber_norms(self.values)
        if mask is not None:
            norms = norms[mask]
        return float(np.max(norms)) if norms.size else 0.0

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.weight))

    def distance(self, other: "Symbol", relative: bool = True) -> float:
        """sup-norm distance, optionally relative to the larger of the two sup norms."""
        diff = np.max(fiber_norms(self.values - other.values))
        if not relative:
            return float(diff)
        scale = max(self.sup_norm(), other.sup_norm(), 1e-300)
        return float(diff / scale)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        if self.n_in != self.n_out:
            return False
        return self.distance(self.adjoint(), relative=False) <= tol * max(self.sup_norm(), 1.0)


def fiber_norms(values: np.ndarray) -> np.ndarray:
    """Spectral norm of every fiber matrix; closed forms for 1x1 and 2x2."""
    r, c = values.shape[-2:]
    if r == 1 or c == 1:
        return np.sqrt(np.sum(np.abs(values) ** 2, axis=(-2, -1)))
    if r == 2 and c == 2:
        # largest eigenvalue of the 2x2 Gram matrix
        a = np.sum(np.abs(values[..., :, 0]) ** 2, axis=-1)
        d = np.sum(np.abs(values[..., :, 1]) ** 2, axis=-1)
        b = np.sum(values[..., :, 0].conj() * values[..., :, 1], axis=-1)
        return np.sqrt((a + d) / 2 + np.sqrt(((a - d) / 2) ** 2 + np.abs(b) ** 2))
    return np.linalg.norm(values, ord=2, axis=(-2, -1))


def fiber_matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Broadcast product of the trailing fiber matrices.

    Equivalent to ``A @ B`` but written as elementwise sums, which is much
    faster than batched matmul when the fibers are tiny and the batch is large.
    """
    r, m = A.shape[-2:]
    m2, c = B.shape[-2:]
    if m != m2:
        raise ComposabilityError("fiber dimensions do not compose")
    shape = np.broadcast_shapes(A.shape[:-2], B.shape[:-2])
    out = np.empty(shape + (r, c), dtype=np.result_type(A, B))
    for i in range(r):
        for j in range(c):
            acc = A[..., i, 0] * B[..., 0, j]
            for k in range(1, m):
                acc = acc + A[..., i, k] * B[..., k, j]
            out[..., i, j] = acc
    return out


def _combine(f, g, op):
    if f is None or g is None:
        return None
    return lambda x, xi: op(np.asarray(f(x, xi)), np.asarray(g(x, xi)))
