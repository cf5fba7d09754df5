"""Plain-text serialization: CSV tables and JSON records."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .model import BASIS_LABEL, TRACE_CONVENTION, InteractionParams


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open() as fh:
        rd = csv.reader(fh)
        header = next(rd)
        rows = [r for r in rd]
    return header, rows


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o)}")


def matrix_record(matrix) -> dict:
    """Self-describing record for a matrix or RDM in the fixed singlet basis."""
    m = np.asarray(matrix)
    if np.iscomplexobj(m):
        data = {"real": m.real.tolist(), "imag": m.imag.tolist()}
    else:
        data = m.tolist()
    return {"basis": BASIS_LABEL, "trace_convention": TRACE_CONVENTION, "data": data}


def write_functional_table(path, kind: str, w: InteractionParams, g11, g12, values) -> Path:
    rows = ((a, b, v, kind, w.U, w.V, w.X) for a, b, v in zip(np.ravel(g11), np.ravel(g12), np.ravel(values)))
    return write_csv(path, ("g11", "g12", "value", "kind", "U", "V", "X"), rows)


def write_grid_field(path, field, generator: str) -> Path:
    """``(g11, g12, value)`` rows for unmasked nodes plus a JSON sidecar."""
    gx, gy, gv = field.nodes()
    path = write_csv(path, ("g11", "g12", "value"), zip(gx, gy, gv))
    meta = {k: v for k, v in field.meta.items()}
    sidecar = {
        "resolution": field.resolution,
        "mask_rule": "(g11 - 1/2)^2 + g12^2 <= 1/4 + 1e-12",
        "generator": generator,
        "meta": meta,
    }
    write_json(path.with_suffix(".json"), sidecar)
    return path


def write_verdicts(path, vmap) -> Path:
    gx, gy, codes = vmap.status.nodes()
    _, _, gap = vmap.gap.nodes()
    rows = ((a, b, int(c), g) for a, b, c, g in zip(gx, gy, codes, gap))
    return write_csv(path, ("g11", "g12", "status_code", "gap"), rows)


def write_sweep(path, sweep) -> Path:
    from .varrep import SWEEP_COLUMNS

    rows = ([*r[:6], int(r[6])] for r in sweep.rows)
    return write_csv(path, SWEEP_COLUMNS, rows)


def write_ellipses(path, ellipses, n: int = 256) -> Path:
    rows = []
    for e in ellipses:
        for a, b in e.sample(n, endpoint=True):
            rows.append((e.branch, a, b))
    return write_csv(path, ("branch", "g11", "g12"), rows)
