"""MGWL binary container and CSV export for symbols and operator matrices.

Symbol layout (little-endian)::

    b"MGWL" u32 version=1 u32 d u32 n f64 x_extent u32 n_out u32 n_in
    complex values as (re, im) f64 pairs, x-index outermost, then xi, row, col

Operator matrices use the same container with the tag b"OPMAT" right after the
magic, ``eps`` stored as an extra f64 after ``x_extent``, and the dense matrix
(with its dx^d weight) in row-major order.
"""
from __future__ import annotations

import csv
import struct
from itertools import product
from pathlib import Path

import numpy as np

from .grid import PhaseGrid
from .quantizer import OperatorMatrix
from .symbol import Symbol

MAGIC = b"MGWL"
OP_TAG = b"OPMAT"
VERSION = 1
_SYM_HEADER = struct.Struct("<4sIIIdII")
_OP_HEADER = struct.Struct("<4s5sIIIddII")


def symbol_file_size(grid: PhaseGrid, n_out: int, n_in: int) -> int:
    return _SYM_HEADER.size + 16 * grid.n ** (2 * grid.d) * n_out * n_in


def operator_file_size(grid: PhaseGrid, eps: float, n_out: int, n_in: int) -> int:
    N = grid.state_grid(eps).size
    return _OP_HEADER.size + 16 * N * N * n_out * n_in


def _complex_bytes(values: np.ndarray) -> bytes:
    return np.ascontiguousarray(values, dtype="<c16").tobytes()


def write_symbol(f: Symbol, path) -> None:
    g = f.grid
    head = _SYM_HEADER.pack(MAGIC, VERSION, g.d, g.n, g.x_extent, f.n_out, f.n_in)
    Path(path).write_bytes(head + _complex_bytes(f.values))


def write_operator(F: OperatorMatrix, path) -> None:
    g = F.grid
    head = _OP_HEADER.pack(MAGIC, OP_TAG, VERSION, g.d, g.n, g.x_extent, F.eps, F.n_out, F.n_in)
    Path(path).write_bytes(head + _complex_bytes(F.M))


def read(path):
    """Read a Symbol or an OperatorMatrix, whichever the file holds."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not an MGWL container")
    if data[4:9] == OP_TAG:
        _, _, ver, d, n, L, eps, n_out, n_in = _OP_HEADER.unpack_from(data)
        _check_version(ver)
        grid = PhaseGrid(d, n, L)
        N = grid.state_grid(eps).size
        M = _payload(data, _OP_HEADER.size, (N * n_out, N * n_in))
        return OperatorMatrix(grid, eps, n_out, n_in, M)
    _, ver, d, n, L, n_out, n_in = _SYM_HEADER.unpack_from(data)
    _check_version(ver)
    grid = PhaseGrid(d, n, L)
    vals = _payload(data, _SYM_HEADER.size, grid.shape + (n_out, n_in))
    return Symbol(grid, vals)


def _check_version(ver):
    if ver != VERSION:
        raise ValueError(f"unsupported MGWL version {ver}")


def _payload(data: bytes, offset: int, shape) -> np.ndarray:
    count = int(np.prod(shape))
    if len(data) != offset + 16 * count:
        raise ValueError("MGWL payload size does not match its header")
    return np.frombuffer(data, dtype="<c16", count=count, offset=offset).astype(complex).reshape(shape)


def symbol_to_csv(f: Symbol, path) -> None:
    """One row per value in container order; floats written as their shortest round-trip repr."""
    d = f.grid.d
    names = [f"ix{j + 1}" for j in range(d)] + [f"ixi{j + 1}" for j in range(d)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["row", "col", "re", "im"])
        flat = f.values.reshape(-1)
        for k, idx in enumerate(product(*[range(s) for s in f.values.shape])):
            v = flat[k]
            w.writerow(list(idx) + [repr(float(v.real)), repr(float(v.imag))])


def operator_to_csv(F: OperatorMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "re", "im"])
        rows, cols = F.M.shape
        for i in range(rows):
            for j in range(cols):
                v = F.M[i, j]
                w.writerow([i, j, repr(float(v.real)), repr(float(v.imag))])


def symbol_from_csv(path, grid: PhaseGrid) -> Symbol:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [list(map(float, row)) for row in r]
    arr = np.array(rows)
    nidx = len(header) - 2
    idx = arr[:, :nidx].astype(int)
    shape = tuple(idx.max(axis=0) + 1)
    vals = np.zeros(shape, dtype=complex)
    vals[tuple(idx.T)] = arr[:, -2] + 1j * arr[:, -1]
    return Symbol(grid, vals)
