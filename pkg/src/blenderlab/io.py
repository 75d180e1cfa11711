"""Serialization helpers: exact number encoding, atomic file writes, CSV."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import mpmath

_MPF_PREFIX = "mpf:"


def encode_number(v) -> Any:
    """JSON-safe exact encoding.

    Doubles stay JSON numbers (``repr`` round-trips bit-exactly).  mpmath
    numbers that are not exactly a double are written as ``"mpf:<man>p<exp>"``,
    the exact binary mantissa and exponent.
    """
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        if math.isfinite(v):
            return v
        return repr(v)
    if isinstance(v, mpmath.mpf):
        f = float(v)
        if math.isfinite(f) and mpmath.mpf(f) == v:
            return f
        man, exp = v.man_exp
        return f"{_MPF_PREFIX}{int(man)}p{int(exp)}"
    return float(v)


def decode_number(v):
    if isinstance(v, str):
        if v.startswith(_MPF_PREFIX):
            man, exp = v[len(_MPF_PREFIX):].split("p")
            return mpmath.mpf((int(man), int(exp)))
        return float(v)
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(v, int):
        return float(v)
    return v


def log_abs(v) -> float:
    """Natural log of ``|v|`` for floats or mpf values of any exponent."""
    return float(mpmath.log(abs(mpmath.mpf(v))))


def to_json_text(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path


def atomic_write_bytes(path: str | os.PathLike, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path


def write_json(path, obj) -> Path:
    return atomic_write_text(path, to_json_text(obj))


def read_json(path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    return atomic_write_text(path, csv_text(header, rows))


def read_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
