"""Atomic JSON/CSV output and config loading."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile

import numpy as np


def fmt(v):
    """Floats with 17 significant digits; everything else via ``str``."""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return str(v)


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` through a temp file in the same directory and rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def write_json(path, obj):
    atomic_write_text(path, dumps_json(obj))


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    atomic_write_text(path, csv_text(header, rows))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def read_series(path):
    """One numeric column from a CSV file; a non-numeric first row is taken as a header."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path} is empty")
    try:
        float(rows[0][0])
    except ValueError:
        rows = rows[1:]
    return np.array([float(r[0]) for r in rows])
