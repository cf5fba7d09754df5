import json

import numpy as np

from dimer_rdmft.export import matrix_record, read_csv, write_csv, write_grid_field, write_json
from dimer_rdmft.model import InteractionParams, build_interaction_matrix
from dimer_rdmft.search import sample_grid


def test_matrix_record_is_self_describing(tmp_path):
    rec = matrix_record(build_interaction_matrix(InteractionParams(1, 2, 3)))
    assert rec["basis"] == "phi1,phi2,phi3"
    assert rec["trace_convention"] == "per_spin_block_trace1"
    assert rec["data"] == [[1, 2, 3], [2, 1, 3], [3, 3, 0]]
    p = write_json(tmp_path / "m.json", matrix_record(np.eye(3) * (1 + 1j)))
    assert json.loads(p.read_text())["data"]["imag"][0][0] == 1.0


def test_csv_round_trip_exact(tmp_path):
    vals = [0.1, 1 / 3, np.pi]
    write_csv(tmp_path / "x.csv", ("v",), ([v] for v in vals))
    header, rows = read_csv(tmp_path / "x.csv")
    assert header == ["v"] and [float(r[0]) for r in rows] == vals


def test_grid_field_sidecar(tmp_path):
    f = sample_grid(lambda a, b: a + b, 11)
    p = write_grid_field(tmp_path / "g.csv", f, "test")
    side = json.loads(p.with_suffix(".json").read_text())
    assert side["resolution"] == 11 and side["generator"] == "test"
    header, rows = read_csv(p)
    assert header == ["g11", "g12", "value"] and len(rows) == int(f.mask.sum())
