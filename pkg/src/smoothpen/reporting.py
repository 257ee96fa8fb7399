"""Deterministic JSON and CSV emitters for solve and lab reports.

Floats are written with 17 significant digits so equal inputs give
byte-identical files.  Non-finite floats are encoded as the strings
``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, List, Mapping, Sequence

import numpy as np

SCHEMA_VERSION = 1
RELATION_FIELDS = ("problem", "family", "relation", "lhs", "rhs", "tol", "pass")


def fmt17(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return json.dumps(fmt17(v))
        text = fmt17(v)
        # keep floats recognisable as floats after a round trip
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with fixed 17-digit floats and a trailing newline."""
    return _encode(obj, indent, 0) + "\n"


def envelope(command: str, payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, **payload}


def decode_float(v):
    """Inverse of the non-finite encoding used by :func:`dumps`."""
    if isinstance(v, str) and v in ("inf", "-inf", "nan"):
        return float(v)
    return v


def csv_text(rows: Iterable[Mapping], fieldnames: Sequence[str]) -> str:
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=list(fieldnames), lineterminator="\n")
    wr.writeheader()
    for row in rows:
        wr.writerow({k: _cell(row.get(k, "")) for k in fieldnames})
    return buf.getvalue()


def _cell(v):
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, (float, np.floating)):
        return fmt17(v)
    return v


def read_relation_csv(text: str) -> List[dict]:
    """Parse relation rows back; ``pass`` becomes True, False or None."""
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        if list(row) != list(RELATION_FIELDS):
            raise ValueError(f"unexpected columns {list(row)}")
        out = dict(row)
        for k in ("lhs", "rhs", "tol"):
            out[k] = float(row[k])
        out["pass"] = {"true": True, "false": False, "": None}[row["pass"]]
        rows.append(out)
    return rows


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
