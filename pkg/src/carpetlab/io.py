"""Artifact writers: field CSVs with JSON sidecars, and plain JSON reports.

CSV numbers are written with 17 significant digits; JSON floats use
Python's shortest round-trip representation. Both are exact and
deterministic, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .spectral import ComplexField

FLOAT_FMT = "%.17g"


def _clean(obj):
    """Make numpy scalars/arrays JSON friendly; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def write_field_csv(path, field: ComplexField, meta: dict | None = None) -> Path:
    """Rows ``x,t,re_psi,im_psi`` ordered by t, then x; sidecar ``<name>.json``."""
    path = Path(path)
    x = field.grid.x
    t = field.grid.t
    values = field.values
    xx = np.tile(x, t.size)
    tt = np.repeat(t, x.size)
    v = values.T.ravel()
    table = np.column_stack([xx, tt, v.real, v.imag])
    np.savetxt(path, table, delimiter=",", fmt=FLOAT_FMT, header="x,t,re_psi,im_psi", comments="")
    sidecar = {
        "quantity": field.quantity,
        "provenance": field.provenance,
        "basis": field.basis.to_dict(),
        "grid": {"x_count": int(x.size), "t_count": int(t.size), "x_min": float(x[0]), "x_max": float(x[-1])},
        "order": "row-major in t, then x",
    }
    if meta:
        sidecar.update(meta)
    write_json(path.with_suffix(".json"), sidecar)
    return path


def read_field_csv(path):
    """Inverse of write_field_csv: (x, t, values[x, t])."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    t = np.unique(data[:, 1])
    x = data[data[:, 1] == data[0, 1], 0]
    values = (data[:, 2] + 1j * data[:, 3]).reshape(t.size, x.size).T
    return x, t, values
