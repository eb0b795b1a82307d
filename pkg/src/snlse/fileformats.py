"""Binary field dumps and CSV sweep tables.

Field dump layout (all little-endian)::

    b"SNLS" | version u32 (=1) | dim u32 | dim * (a f64, b f64, N u64) | N^d * (re f64, im f64)

Values are stored in C order of the ``indexing='ij'`` node mesh.
"""
from __future__ import annotations

import csv
import io
import os
import struct
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .spectral_grid import Field, Grid

MAGIC = b"SNLS"
VERSION = 1

CSV_COLUMNS = ("reg", "alpha", "epsilon", "n", "integrator", "tau",
               "err_wave_l2", "err_density_l1", "err_energy")


class FieldFormatError(Exception):
    """Base class for unreadable field dumps."""


class ShortReadError(FieldFormatError):
    pass


class BadMagicError(FieldFormatError):
    pass


class VersionMismatchError(FieldFormatError):
    pass


def atomic_write(path: str | os.PathLike, data: bytes) -> None:
    """Write ``data`` to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def field_to_bytes(psi: Field) -> bytes:
    g = psi.grid
    head = [MAGIC, struct.pack("<II", VERSION, g.d)]
    for a, b, n in zip(g.a, g.b, g.N):
        head.append(struct.pack("<ddQ", a, b, n))
    body = np.ascontiguousarray(psi.values).astype("<c16", copy=False).tobytes()
    return b"".join(head) + body


def field_from_bytes(data: bytes) -> Field:
    def take(n, what):
        nonlocal pos
        if pos + n > len(data):
            raise ShortReadError(f"truncated field dump while reading {what}")
        chunk = data[pos:pos + n]
        pos += n
        return chunk

    pos = 0
    if take(4, "magic") != MAGIC:
        raise BadMagicError("not a field dump (bad magic)")
    version, dim = struct.unpack("<II", take(8, "header"))
    if version != VERSION:
        raise VersionMismatchError(f"field dump version {version}, expected {VERSION}")
    if dim not in (1, 2):
        raise FieldFormatError(f"unsupported dimension {dim}")
    axes = [struct.unpack("<ddQ", take(24, "axis header")) for _ in range(dim)]
    try:
        grid = Grid(tuple(a for a, _, _ in axes), tuple(b for _, b, _ in axes),
                    tuple(int(n) for _, _, n in axes))
    except ValueError as exc:
        raise FieldFormatError(f"invalid grid in header: {exc}") from None
    raw = take(16 * grid.size, "values")
    if pos != len(data):
        raise FieldFormatError(f"{len(data) - pos} trailing bytes after field values")
    values = np.frombuffer(raw, dtype="<c16").astype(np.complex128).reshape(grid.shape)
    try:
        return Field(grid, values)
    except ValueError as exc:
        raise FieldFormatError(str(exc)) from None


def dump_field(psi: Field, path: str | os.PathLike) -> None:
    atomic_write(path, field_to_bytes(psi))


def load_field(path: str | os.PathLike) -> Field:
    return field_from_bytes(Path(path).read_bytes())


def format_float(x) -> str:
    return repr(float(x))


def csv_text(rows: Iterable[Mapping], slopes: Sequence[tuple[str, float]] = (),
             comments: Sequence[str] = ()) -> str:
    """Render sweep rows (dicts keyed by :data:`CSV_COLUMNS`) plus ``# slope`` trailers.

    ``comments`` go at the top as ``# ...`` lines.
    """
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([row[c] if isinstance(row[c], str) else
                    (str(row[c]) if isinstance(row[c], int) else format_float(row[c]))
                    for c in CSV_COLUMNS])
    for label, value in slopes:
        buf.write(f"# slope,{label},{format_float(value)}\n")
    return buf.getvalue()


def emit_csv(path: str | os.PathLike, rows: Iterable[Mapping],
             slopes: Sequence[tuple[str, float]] = (), comments: Sequence[str] = ()) -> None:
    atomic_write(path, csv_text(rows, slopes, comments).encode("utf-8"))


def read_csv(path: str | os.PathLike) -> tuple[list[dict], dict[str, float]]:
    """Parse a table written by :func:`emit_csv` into (rows, slopes)."""
    rows, slopes = [], {}
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    data = []
    for line in lines:
        if line.startswith("# slope,"):
            _, label, value = line.split(",", 2)
            slopes[label] = float(value)
        elif not line.startswith("#"):
            data.append(line)
    for rec in csv.DictReader(data):
        rows.append(rec)
    return rows, slopes
