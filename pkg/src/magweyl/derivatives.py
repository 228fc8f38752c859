"""Partial derivatives of symbols by fourth-order central differences."""
from __future__ import annotations

import numpy as np

from .symbol import Symbol

_FD_STEP = 1e-3
_COEFFS = ((1, 2 / 3), (2, -1 / 12))


def partial(f: Symbol, axis: str, j: int, h: float = _FD_STEP) -> Symbol:
    """d f / d x_j (``axis='x'``) or d f / d xi_j (``axis='xi'``).

    With an exact callable the stencil runs on the callable with step ``h``, and
    the result keeps a callable so derivatives can be chained.  Grid samples
    fall back to the periodic stencil with the grid spacing.
    """
    if axis not in ("x", "xi"):
        raise ValueError("axis must be 'x' or 'xi'")
    grid = f.grid
    d = grid.d
    if f.func is not None:
        e = np.zeros(d)
        e[j] = 1.0
        base = f.func

        def func(x, xi):
            acc = 0.0
            for k, c in _COEFFS:
                if axis == "x":
                    plus, minus = base(x + k * h * e, xi), base(x - k * h * e, xi)
                else:
                    plus, minus = base(x, xi + k * h * e), base(x, xi - k * h * e)
                acc = acc + c * (np.asarray(plus) - np.asarray(minus))
            return acc / h

        return Symbol.from_function(grid, func)
    ax = j if axis == "x" else d + j
    step = grid.dx if axis == "x" else grid.dxi
    v = f.values
    acc = np.zeros_like(v)
    for k, c in _COEFFS:
        acc = acc + c * (np.roll(v, -k, axis=ax) - np.roll(v, k, axis=ax))
    return Symbol(grid, acc / step)


def gradients(f: Symbol) -> tuple[list[Symbol], list[Symbol]]:
    """([d f/d x_j], [d f/d xi_j]) for j = 1..d."""
    d = f.grid.d
    return ([partial(f, "x", j) for j in range(d)], [partial(f, "xi", j) for j in range(d)])
