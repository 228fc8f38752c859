import numpy as np
import pytest

from magweyl import io
from magweyl.grid import PhaseGrid
from magweyl.magnetic import MagneticData
from magweyl.quantizer import quantize
from magweyl.symbol import Symbol


def test_symbol_binary_round_trip(tmp_path, rng):
    g = PhaseGrid(2, 6, 3.0)
    f = Symbol(g, rng.normal(size=g.shape + (2, 3)) + 1j * rng.normal(size=g.shape + (2, 3)))
    p = tmp_path / "f.mgwl"
    io.write_symbol(f, p)
    assert p.stat().st_size == io.symbol_file_size(g, 2, 3)
    back = io.read(p)
    assert back.grid == g and np.array_equal(back.values, f.values)


def test_operator_binary_round_trip(tmp_path):
    g = PhaseGrid.balanced(1, 8)
    F = quantize(Symbol.gaussian(g, matrix=[[1, 1j], [0, 2]]), MagneticData.zero(1, 0.5))
    p = tmp_path / "F.mgwl"
    io.write_operator(F, p)
    assert p.stat().st_size == io.operator_file_size(g, 0.5, 2, 2)
    back = io.read(p)
    assert back.eps == 0.5 and np.array_equal(back.M, F.M)


def test_csv_round_trip_is_exact(tmp_path, rng):
    g = PhaseGrid.balanced(1, 6)
    f = Symbol(g, rng.normal(size=g.shape + (1, 2)) + 1j * rng.normal(size=g.shape + (1, 2)))
    p = tmp_path / "f.csv"
    io.symbol_to_csv(f, p)
    assert np.array_equal(io.symbol_from_csv(p, g).values, f.values)


def test_rejects_corrupt_files(tmp_path):
    p = tmp_path / "bad.mgwl"
    p.write_bytes(b"NOPE" + bytes(40))
    with pytest.raises(ValueError):
        io.read(p)
    g = PhaseGrid.balanced(1, 4)
    io.write_symbol(Symbol.gaussian(g), p)
    p.write_bytes(p.read_bytes()[:-16])
    with pytest.raises(ValueError, match="payload"):
        io.read(p)
