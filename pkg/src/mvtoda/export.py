"""Deterministic JSON and CSV output.

JSON floats use Python's shortest round-trip representation and CSV values
are written with ``%.17g``; both read back to the identical doubles.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .diffop import BandedDifferenceOperator
from .mvop import MvopFamily


def matrix_record(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_record(rec: dict) -> np.ndarray:
    return np.asarray(rec["re"], dtype=float) + 1j * np.asarray(rec["im"], dtype=float)


def family_to_dict(fam: MvopFamily) -> dict:
    return {
        "weight": fam.weight.description,
        "size": fam.size,
        "t": fam.t,
        "nmax": fam.nmax,
        "method": fam.method,
        "quadrature": {"scheme": fam.rule.scheme.value, "npoints": fam.rule.npoints},
        "polys": [{"n": n, "coeffs": [matrix_record(c) for c in p.coeffs]} for n, p in enumerate(fam.polys)],
        "norms": [matrix_record(h) for h in fam.norms],
        "B": [matrix_record(b) for b in fam.recur_B],
        "C": [matrix_record(c) for c in fam.recur_C],
    }


def operator_from_dict(d: dict) -> BandedDifferenceOperator:
    op = BandedDifferenceOperator.empty(d["bandwidth"], d["nmax"], d["size"], d["t"])
    for e in d["entries"]:
        op.coeff[e["j"] + d["bandwidth"], e["n"]] = matrix_from_record(e)
    return op


def _clean(obj):
    """Replace NaN/inf (not valid JSON) by ``None``; convert numpy scalars."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(payload) -> str:
    return json.dumps(_clean(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, payload) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(dumps(payload), encoding="utf-8")


def trajectory_rows(states: Iterable, nmax: Optional[int] = None):
    """Rows ``(t, m, n, re_00, im_00, re_01, ...)`` for every available band entry."""
    for st in states:
        op = st.op
        top = op.nmax if nmax is None else min(nmax, op.nmax)
        for m in range(-op.k, op.k + 1):
            for n in range(top + 1):
                g = op.coeff[m + op.k, n]
                if np.isnan(g).any():
                    continue
                vals = []
                for z in g.ravel():
                    vals += [z.real, z.imag]
                yield [st.t, m, n] + vals


def write_trajectory_csv(path, states, nmax: Optional[int] = None) -> int:
    states = list(states)
    size = states[0].op.size
    header = ["t", "m", "n"]
    for a in range(size):
        for b in range(size):
            header += [f"re_{a}{b}", f"im_{a}{b}"]
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in trajectory_rows(states, nmax):
            w.writerow(["%.17g" % row[0], row[1], row[2]] + ["%.17g" % v for v in row[3:]])
            count += 1
    return count
