"""Reading and writing signals, step functions and tables."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np

from .stepfn import StepFunction, embed


class DataError(ValueError):
    """Malformed or unreadable input data."""


def fmt(v) -> str:
    """Shortest text that round-trips the float."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def read_signal_csv(path: Union[str, Path]) -> np.ndarray:
    """One value per line, or ``x,y`` pairs with equidistant ``x``.

    Blank lines and lines starting with ``#`` are skipped.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"{path}: cannot read: {exc.strerror}") from exc
    xs: List[float] = []
    ys: List[float] = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = [p.strip() for p in s.split(",")]
        if width is None:
            width = len(parts)
            if width not in (1, 2):
                raise DataError(f"{path}:{lineno}: expected 1 or 2 columns, got {width}")
        elif len(parts) != width:
            raise DataError(f"{path}:{lineno}: expected {width} columns, got {len(parts)}")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise DataError(f"{path}:{lineno}: not a number: {s!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise DataError(f"{path}:{lineno}: non-finite value")
        if width == 2:
            xs.append(vals[0])
        ys.append(vals[-1])
    if not ys:
        raise DataError(f"{path}: no data")
    if len(xs) > 2:
        d = np.diff(xs)
        if np.any(d <= 0) or np.max(np.abs(d - d.mean())) > 1e-6 * abs(d.mean()):
            raise DataError(f"{path}: x column is not equidistant")
    return np.array(ys)


def write_signal_csv(values: Sequence[float], path=None) -> str:
    text = "".join(fmt(v) + "\n" for v in values)
    if path is not None:
        Path(path).write_text(text)
    return text


def read_step_function(path: Union[str, Path]) -> StepFunction:
    """A step function from JSON (``breakpoints``/``levels`` or a fit record) or a CSV signal."""
    p = Path(path)
    if p.suffix.lower() != ".json":
        return embed(read_signal_csv(p))
    try:
        d = json.loads(p.read_text())
    except OSError as exc:
        raise DataError(f"{path}: cannot read: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    try:
        if "breakpoints" in d:
            return StepFunction.from_dict(d)
        if "jumps" in d and "n" in d:
            return StepFunction(tuple(j / d["n"] for j in d["jumps"]), tuple(d["levels"]))
    except (TypeError, ValueError) as exc:
        raise DataError(f"{path}: invalid step function: {exc}") from exc
    raise DataError(f"{path}: expected 'breakpoints'/'levels' or 'n'/'jumps'/'levels'")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return None
        return v
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=False) + "\n"


def table_to_csv(rows: Iterable[dict]) -> str:
    rows = list(rows)
    if not rows:
        return ""
    buf = io.StringIO()
    cols = list(rows[0].keys())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([fmt(r[c]) for c in cols])
    return buf.getvalue()
