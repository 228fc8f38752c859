"""Phase-space grids and trigonometric interpolation on the periodic box."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def japanese(xi: np.ndarray) -> np.ndarray:
    """<xi> = sqrt(1 + |xi|^2) over the trailing axis."""
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(1.0 + np.sum(xi * xi, axis=-1))


@dataclass(frozen=True)
class PhaseGrid:
    """Periodic discretization of T*R^d.

    Positions live on [-L, L) with ``n`` nodes per axis; momenta use the FFT-dual
    spacing ``dxi = pi / L`` so that ``dx * dxi * n == 2 pi``.
    """

    d: int
    n: int
    x_extent: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"only d=1 or d=2 supported, got d={self.d}")
        if self.n < 2 or self.n % 2:
            raise ValueError(f"grid.n must be even and >= 2, got {self.n}")
        if not self.x_extent > 0:
            raise ValueError("x_extent must be positive")

    @classmethod
    def balanced(cls, d: int, n: int) -> "PhaseGrid":
        """Grid with equal position and momentum spacing, L = sqrt(n pi / 2)."""
        return cls(d, n, float(np.sqrt(n * np.pi / 2)))

    @property
    def dx(self) -> float:
        return 2.0 * self.x_extent / self.n

    @property
    def dxi(self) -> float:
        return np.pi / self.x_extent

    @property
    def weight(self) -> float:
        """Quadrature weight of one phase-space cell, (dx dxi)^d."""
        return (self.dx * self.dxi) ** self.d

    @cached_property
    def x_nodes(self) -> np.ndarray:
        return -self.x_extent + self.dx * np.arange(self.n)

    @cached_property
    def xi_nodes(self) -> np.ndarray:
        return self.dxi * (np.arange(self.n) - self.n // 2)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * (2 * self.d)

    @property
    def size(self) -> int:
        return self.n ** self.d

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays X, XI of shape (n,)*2d + (d,) with the node coordinates."""
        axes = [self.x_nodes] * self.d + [self.xi_nodes] * self.d
        grids = np.meshgrid(*axes, indexing="ij")
        X = np.stack(grids[: self.d], axis=-1)
        XI = np.stack(grids[self.d:], axis=-1)
        return X, XI

    def position_mesh(self) -> np.ndarray:
        grids = np.meshgrid(*([self.x_nodes] * self.d), indexing="ij")
        return np.stack(grids, axis=-1)

    def state_grid(self, eps: float) -> "PhaseGrid":
        """Grid carrying states for semiclassical parameter ``eps = 1/k``.

        Same spacing ``dx``, box stretched by ``k`` so that macroscopic symbol
        nodes ``x`` sit exactly on the state nodes ``x / eps``.
        """
        k = eps_multiplier(eps)
        if k == 1:
            return self
        return PhaseGrid(self.d, self.n * k, self.x_extent * k)

    def to_dict(self) -> dict:
        return {"d": self.d, "n": self.n, "x_extent": self.x_extent}


def eps_multiplier(eps: float) -> int:
    """Return k with eps == 1/k; other values of eps are not representable."""
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    k = int(round(1.0 / eps))
    if abs(k * eps - 1.0) > 1e-9:
        raise ValueError(f"eps must be the reciprocal of an integer, got {eps}")
    return k


def frequencies(n: int, dx: float) -> np.ndarray:
    """Angular frequencies of the n-point periodic grid, Nyquist at -pi/dx."""
    return 2 * np.pi * np.fft.fftfreq(n, d=dx)


def fourier_eval_matrix(n: int, x_extent: float, points: np.ndarray) -> np.ndarray:
    """Matrix E with (E @ samples)[p] the trigonometric interpolant at ``points[p]``.

    The interpolant uses the frequencies ``k pi / L`` with ``-n/2 <= k < n/2``;
    the Nyquist term is kept as a complex exponential so that shifts stay unitary.
    """
    dx = 2.0 * x_extent / n
    nodes = -x_extent + dx * np.arange(n)
    k = np.arange(-n // 2, n // 2) * (np.pi / x_extent)
    points = np.asarray(points, dtype=float)
    left = np.exp(1j * np.multiply.outer(points, k))
    right = np.exp(-1j * np.multiply.outer(k, nodes))
    return (left @ right) / n


def fourier_shift(values: np.ndarray, shift: float, dx: float, axis: int) -> np.ndarray:
    """Evaluate the periodic trigonometric interpolant at ``nodes + shift`` along ``axis``."""
    n = values.shape[axis]
    omega = frequencies(n, dx)
    phase = np.exp(1j * omega * shift)
    shape = [1] * values.ndim
    shape[axis] = n
    return np.fft.ifft(np.fft.fft(values, axis=axis) * phase.reshape(shape), axis=axis)
