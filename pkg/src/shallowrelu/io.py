"""JSON and CSV helpers shared by every module.

Floats are written with 17 significant digits so that every double
round-trips exactly.
"""

import csv
import json
import math

import numpy as np


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            raise ValueError(f"non-finite float {v!r} cannot be serialized")
        s = format(v, ".17g")
        if s in ("0", "-0"):
            return "0.0"
        return s
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(obj) -> str:
    return _fmt(obj)


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_csv(path, X, z):
    X = np.atleast_2d(np.asarray(X, float))
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow([f"x{i + 1}" for i in range(X.shape[1])] + ["z"])
        for row, v in zip(X, z):
            wr.writerow([format(float(a), ".17g") for a in row] + [format(float(v), ".17g")])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    head = rows[0]
    if not head or head[-1] != "z" or any(h != f"x{i + 1}" for i, h in enumerate(head[:-1])):
        raise ValueError(f"{path}: header must be x1,...,xn,z")
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    if data.size == 0:
        raise ValueError(f"{path}: no samples")
    return data[:, :-1], data[:, -1]
