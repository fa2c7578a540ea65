"""JSON matrix schema and small CSV helpers.

Real matrices are stored as ``{"d": n, "entries": [[...], ...]}`` (row-major);
complex ones as ``{"d": n, "re": [[...]], "im": [[...]]}``. Floats are written
with ``repr``, which round-trips doubles exactly (17 significant digits at most).
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidInput


def _rows(M) -> list:
    return [[float(v) for v in row] for row in np.asarray(M)]


def matrix_to_json(M) -> dict:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInput("only square matrices are serialised")
    if np.iscomplexobj(M) and np.any(M.imag != 0):
        return {"d": M.shape[0], "re": _rows(M.real), "im": _rows(M.imag)}
    return {"d": M.shape[0], "entries": _rows(np.real(M))}


def _parse_rows(rows, d):
    try:
        A = np.array(rows, dtype=float)
    except (TypeError, ValueError) as e:
        raise InvalidInput(f"matrix entries are not numeric: {e}") from None
    if A.shape != (d, d):
        raise InvalidInput(f"expected a {d}x{d} matrix, got shape {A.shape}")
    return A


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict) or "d" not in obj:
        raise InvalidInput('matrix JSON needs a "d" field')
    d = obj["d"]
    if not isinstance(d, int) or d < 1:
        raise InvalidInput('"d" must be a positive integer')
    if "entries" in obj:
        return _parse_rows(obj["entries"], d)
    if "re" in obj and "im" in obj:
        return _parse_rows(obj["re"], d) + 1j * _parse_rows(obj["im"], d)
    raise InvalidInput('matrix JSON needs "entries" or "re"/"im"')


def dumps(obj, **kw) -> str:
    return json.dumps(obj, default=_default, allow_nan=False, **kw)


def _default(o):
    if isinstance(o, np.ndarray):
        return matrix_to_json(o) if o.ndim == 2 else [float(v) for v in o]
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"cannot serialise {type(o).__name__}")


def finite_or_none(x):
    """JSON has no infinity; durations at infinity become null."""
    return None if x is None or (isinstance(x, float) and math.isinf(x)) else x


def load_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise InvalidInput(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InvalidInput(f"{path} is not valid JSON: {e.msg}") from None


def load_matrix(path) -> np.ndarray:
    return matrix_from_json(load_json(path))


def load_vector(path) -> np.ndarray:
    """A probability vector: a JSON list or {"entries": [...]}."""
    obj = load_json(path)
    if isinstance(obj, dict):
        obj = obj.get("entries")
    try:
        v = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise InvalidInput(f"{path} does not hold a numeric vector") from None
    if v.ndim != 1:
        raise InvalidInput(f"{path} does not hold a 1-d vector")
    return v


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as e:
        raise InvalidInput(f"cannot read {path}: {e.strerror}") from None
