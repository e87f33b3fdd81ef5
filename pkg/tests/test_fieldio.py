import numpy as np
import pytest

from mnlslab.fieldio import MAGIC, format_value, load_field, read_csv, save_field, write_csv
from mnlslab.grid import Grid


def test_round_trip(tmp_path):
    g = Grid(8, 1.5)
    rng = np.random.default_rng(0)
    u = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    p = tmp_path / "u.field"
    save_field(p, g, u, "u", 0.25)
    g2, v, meta = load_field(p)
    assert g2 == g and meta == {"name": "u", "time": 0.25}
    np.testing.assert_array_equal(v, u)


def test_layout_x1_fastest(tmp_path):
    g = Grid(8, 1.0)
    u = np.zeros(g.shape, complex)
    u[1, 0, 0] = 1 + 2j
    u[0, 1, 0] = 3.0
    p = tmp_path / "u.field"
    save_field(p, g, u)
    raw = p.read_bytes()
    body = np.frombuffer(raw[raw.index(b"end\n") + 4:], dtype="<f8")
    assert raw.startswith(MAGIC.encode())
    assert body[2] == 1.0 and body[3] == 2.0  # index 1 along x1, interleaved re, im
    assert body[2 * 8] == 3.0


def test_rejects_bad_files(tmp_path):
    g = Grid(8, 1.0)
    with pytest.raises(ValueError):
        save_field(tmp_path / "x", g, np.zeros((4, 4, 4)))
    with pytest.raises(ValueError):
        save_field(tmp_path / "x", g, np.full(g.shape, np.nan))
    bad = tmp_path / "bad"
    bad.write_bytes(b"hello\n")
    with pytest.raises(ValueError, match="magic"):
        load_field(bad)
    p = tmp_path / "u.field"
    save_field(p, g, np.zeros(g.shape))
    p.write_bytes(p.read_bytes()[:-16])
    with pytest.raises(ValueError, match="data bytes"):
        load_field(p)


def test_csv_formatting(tmp_path):
    assert format_value(0.1) == "0.1" and format_value(float("nan")) == "nan"
    assert format_value(np.float64(1 / 3)) == repr(1 / 3)
    p = tmp_path / "t.csv"
    write_csv(p, ("t", "x"), [{"t": 0.0, "x": 1e-300}, {"t": 0.5, "x": float("nan")}])
    assert p.read_text() == "t,x\n0.0,1e-300\n0.5,nan\n"
    assert read_csv(p)[1]["x"] == "nan"
