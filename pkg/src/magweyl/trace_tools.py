"""Trace formula, Schatten norms and local trace-class checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .magnetic import MagneticData
from .quantizer import OperatorMatrix, quantize
from .symbol import Symbol


@dataclass(frozen=True)
class TraceCheck:
    lhs: complex
    rhs: complex
    defect: float


def phase_space_trace(f: Symbol, eps: float) -> complex:
    """(2 pi eps)^-d int tr f by the grid quadrature (dx dxi)^d sum."""
    g = f.grid
    tr = np.trace(f.values, axis1=-2, axis2=-1)
    return complex((2 * np.pi * eps) ** (-g.d) * g.weight * tr.sum())


def trace_formula_check(f: Symbol, mag: MagneticData) -> TraceCheck:
    """Matrix trace of Op^A(f) against the phase-space integral of tr f."""
    if f.n_in != f.n_out:
        raise ValueError("trace needs a square fiber")
    lhs = complex(np.trace(quantize(f, mag).M))
    rhs = phase_space_trace(f, mag.eps)
    scale = abs(rhs)
    defect = abs(lhs - rhs) / scale if scale > 0 else abs(lhs - rhs)
    return TraceCheck(lhs, rhs, float(defect))


def _matrix(M) -> np.ndarray:
    return M.M if isinstance(M, OperatorMatrix) else np.asarray(M)


def schatten_norm(M, p: float) -> float:
    """(sum sigma_i^p)^(1/p) from a full SVD; p = inf gives the operator norm."""
    if p < 1:
        raise ValueError("Schatten norms need p >= 1")
    s = np.linalg.svd(_matrix(M), compute_uv=False)
    if np.isinf(p):
        return float(s.max(initial=0.0))
    return float(np.sum(s ** p) ** (1.0 / p))


def abs_power(M, p: float) -> np.ndarray:
    """|T|^p = V diag(sigma^p) V^* for T = U diag(sigma) V^*."""
    _, s, Vh = np.linalg.svd(_matrix(M))
    return (Vh.conj().T * s ** p) @ Vh


def local_trace_check(f: Symbol, chi: Symbol, p: float, mag: MagneticData) -> float:
    """|| Op(chi) |Op(f)|^p ||_1^(1/p)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    C = quantize(chi, mag).M
    T = abs_power(quantize(f, mag), p)
    return schatten_norm(C @ T, 1.0) ** (1.0 / p)
