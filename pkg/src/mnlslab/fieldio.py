"""Field snapshot files and CSV writing.

Snapshot layout: UTF-8 header lines ``key value`` opened by the magic line and
closed by ``end``, followed by little-endian float64 (re, im) pairs with the
x1 index varying fastest.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .grid import Grid

MAGIC = "MNLS-FIELD 1"


def save_field(path, grid: Grid, values, name: str = "u", time: float = 0.0) -> None:
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("refusing to save a non-finite field")
    if any(c.isspace() for c in name) or not name:
        raise ValueError("field name must be a non-empty token without whitespace")
    header = "\n".join([
        MAGIC,
        f"dim {grid.dim}",
        f"N {grid.n}",
        f"L {grid.half_length!r}",
        f"offset {grid.offset!r}",
        f"name {name}",
        f"time {float(time)!r}",
        "end",
    ]) + "\n"
    data = values.astype("<c16").ravel(order="F").tobytes()
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write(data)


def load_field(path):
    """Return ``(grid, values, meta)``; ``values`` is complex with shape (N, N, N)."""
    raw = Path(path).read_bytes()
    meta = {}
    pos = 0
    first = True
    while True:
        nl = raw.find(b"\n", pos)
        if nl < 0:
            raise ValueError(f"{path}: truncated header")
        line = raw[pos:nl].decode("utf-8").strip()
        pos = nl + 1
        if first:
            if line != MAGIC:
                raise ValueError(f"{path}: not a field snapshot (bad magic line)")
            first = False
            continue
        if line == "end":
            break
        key, _, val = line.partition(" ")
        meta[key] = val
    for key in ("dim", "N", "L", "offset", "name", "time"):
        if key not in meta:
            raise ValueError(f"{path}: header is missing {key!r}")
    if int(meta["dim"]) != 3:
        raise ValueError(f"{path}: only dim 3 fields are supported")
    grid = Grid(int(meta["N"]), float(meta["L"]))
    if float(meta["offset"]) != grid.offset:
        raise ValueError(f"{path}: unsupported node offset {meta['offset']}")
    n3 = grid.n**3
    body = raw[pos:]
    if len(body) != 16 * n3:
        raise ValueError(f"{path}: expected {16 * n3} data bytes, found {len(body)}")
    values = np.frombuffer(body, dtype="<c16").reshape(grid.shape, order="F").astype(complex)
    out = {"name": meta["name"], "time": float(meta["time"])}
    return grid, values, out


def format_value(v) -> str:
    """Round-trip exact text for floats, plain text otherwise."""
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return repr(v)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return str(v)


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_value(row[c]) for c in columns])


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
