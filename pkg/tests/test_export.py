from __future__ import annotations

import csv
import json

import numpy as np

from mvtoda.export import dumps, family_to_dict, matrix_from_record, operator_from_dict, write_trajectory_csv
from mvtoda.hermite import HermiteParams, casimir, hermite_weight
from mvtoda.diffop import compute_g
from mvtoda.mvop import build_family
from mvtoda.presets import closed_form_state
from mvtoda.toda import integrate


def test_family_and_operator_roundtrip():
    p = HermiteParams((1.0,))
    fam = build_family(hermite_weight(p), 0.2, 5)
    d = json.loads(dumps(family_to_dict(fam)))
    assert np.array_equal(matrix_from_record(d["norms"][3]), fam.norms[3])
    op = compute_g(fam, casimir(p))
    back = operator_from_dict(json.loads(dumps(op.to_dict())))
    assert np.array_equal(back.coeff, op.coeff, equal_nan=True)


def test_nan_becomes_null():
    assert json.loads(dumps({"x": float("nan"), "y": np.float64(1.5)})) == {"x": None, "y": 1.5}


def test_csv_roundtrip(tmp_path):
    traj = integrate(closed_form_state("hermite2", 40, 0.0), 0.1, 4)
    path = tmp_path / "traj.csv"
    rows = write_trajectory_csv(path, traj, nmax=5)
    with path.open() as fh:
        data = list(csv.reader(fh))
    assert data[0][:3] == ["t", "m", "n"] and len(data) == rows + 1
    last = [r for r in data[1:] if float(r[0]) == traj[-1].t and r[1] == "0" and r[2] == "2"][0]
    g = traj[-1].op.get(0, 2)
    assert float(last[3]) == g[0, 0].real
