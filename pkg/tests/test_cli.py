import csv
import json

import numpy as np
import pytest

from dimer_rdmft.analytic import f_r_pure_general_cartesian
from dimer_rdmft.cli import EXIT_CHECK, EXIT_INVALID, EXIT_OK, OUT_ENV, main
from dimer_rdmft.model import InteractionParams, RealRdm


def _run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    return code, out


def _summary(out):
    return json.loads((out / "summary.json").read_text())


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_functional_surface_corner_value(tmp_path):
    code, out = _run(tmp_path, "functional", "--kind", "fr-pure", "-U", "1", "--grid", "201")
    assert code == EXIT_OK
    assert _summary(out)["value_at_0_0"] == pytest.approx(1.0)
    man = json.loads((out / "manifest.json").read_text())
    assert {"config", "version", "wall_time_s", "outputs"} <= set(man)
    row = _rows(out / "functional.csv")[0]
    assert set(row) == {"g11", "g12", "value", "kind", "U", "V", "X"}


def test_functional_slice_flat_then_curved(tmp_path):
    code, out = _run(tmp_path, "functional", "--kind", "fc-pure", "-U", "1", "--slice", "g11=0.5", "--grid", "81")
    assert code == EXIT_OK
    rows = _rows(out / "slice.csv")
    y = np.array([float(r["g12"]) for r in rows])
    v = np.array([float(r["value"]) for r in rows])
    assert v.min() == pytest.approx(0.0, abs=1e-12)
    assert y[np.argmin(v)] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(v[y >= 0]) >= -1e-12)


def test_functional_slice_regenerates_general_form(tmp_path):
    code, out = _run(tmp_path, "functional", "--kind", "fr-pure", "-U", "1", "-V", "0.5", "--slice", "g11=0.5", "--grid", "41")
    assert code == EXIT_OK
    w = InteractionParams(1, 0.5)
    for r in _rows(out / "slice.csv"):
        y = float(r["g12"])
        assert float(r["value"]) == pytest.approx(f_r_pure_general_cartesian(w, RealRdm(0.5, y)), abs=1e-15)


def test_vrep_region_counts(tmp_path):
    code, out = _run(tmp_path, "vrep", "-U", "1", "--grid", "151", "--check")
    assert code == EXIT_OK and _summary(out)["region_count"] == 2
    assert (out / "ellipses.csv").exists()
    code, out = _run(tmp_path, "vrep", "-U", "1", "--kind", "fc-pure", "--grid", "151", "--check")
    assert code == EXIT_OK and _summary(out)["region_count"] == 0


def test_vrep_generalized_overlay(tmp_path):
    code, out = _run(tmp_path, "vrep", "--interaction", "1,-0.5,0", "--grid", "151", "--check")
    assert code == EXIT_OK
    s = _summary(out)
    assert s["region_count"] == 2 and len(s["vanishing_angles"]) == 4


def test_force_check(tmp_path):
    code, out = _run(tmp_path, "force", "-U", "1", "--phi", "1.5708", "--check")
    assert code == EXIT_OK
    fit = _summary(out)["fits"][0]
    assert fit["exponent"] == pytest.approx(-0.5, abs=0.02)


def test_energy_check(tmp_path):
    code, out = _run(tmp_path, "energy", "-t", "1", "--eps1", "0", "--eps2", "0", "-U", "1", "--kind", "fr-ens", "--grid", "201", "--check")
    assert code == EXIT_OK
    assert _summary(out)["abs_error"] < 1e-6


def test_envelope_check(tmp_path):
    code, out = _run(tmp_path, "envelope", "-U", "1", "--check")
    assert code == EXIT_OK
    assert _summary(out)["max_abs_error_vs_piecewise"] < 2e-3
    assert json.loads((out / "envelope.json").read_text())["resolution"] == 201


def test_sweep_check(tmp_path):
    code, out = _run(tmp_path, "sweep", "-U", "1", "--samples", "1000", "--check")
    assert code == EXIT_OK
    assert _rows(out / "sweep.csv")[0].keys() == {"t", "eps1", "eps2", "g11", "g12", "energy", "degeneracy"}


def test_check_failure_exit_code(tmp_path):
    # a loose envelope grid cannot meet the accuracy bound
    code, _ = _run(tmp_path, "envelope", "-U", "1", "--grid", "5", "--check")
    assert code == EXIT_CHECK


@pytest.mark.parametrize(
    "args",
    [
        ["energy", "--grid", "10"],
        ["vrep", "--grid", "50"],
        ["functional", "--slice", "g11=2"],
        ["functional", "--slice", "x=0.1"],
        ["functional", "--interaction", "1,2"],
        ["energy", "--kind", "nope"],
        ["vrep", "--kind", "fr-ens"],
        ["force", "--r-max", "0.5"],
        ["sweep", "--samples", "10"],
    ],
)
def test_validation_errors(tmp_path, args):
    code, _ = _run(tmp_path, *args)
    assert code == EXIT_INVALID


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["functional", "--grid", "11", "--out", str(blocker / "sub")]) == EXIT_INVALID


def test_env_default_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    assert main(["functional", "--grid", "11"]) == EXIT_OK
    assert (tmp_path / "env" / "functional" / "functional.csv").exists()


def test_deterministic_outputs(tmp_path):
    for name in ("a", "b"):
        assert main(["vrep", "-U", "1", "-V", "0.5", "--grid", "101", "--seed", "7", "--out", str(tmp_path / name)]) == 0
    for f in ("verdicts.csv", "ellipses.csv", "summary.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
