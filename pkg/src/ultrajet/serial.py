"""File formats: JSON specs in, JSON/CSV reports out.

Sequence specs: {"family": "gevrey"|"qgevrey"|"powerlog"|"table",
                 "params": {...}, "K": int}
Weight functions: {"kind": "omega_s", "s": s} or
                  {"kind": "table", "points": [[t, w], ...]}
Matrices: a weight-function spec plus "params"/"K", or
          {"kind": "rows", "rows": [seq-spec, ...], "params": [...]}
Jets: {"points": [...], "intervals": [[a,b], ...], "order_cap": p,
       "values": [[...], ...]} (values row-aligned with carried points).

Writes are atomic (temp file + rename) and deterministic for a fixed spec.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile

import numpy as np

from .errors import SequenceSpecError
from .jets import CompactSet1D, Jet
from .seqcalc import WeightSequence, make_sequence
from .weightfunc import (DEFAULT_PARAMS, WeightFunction, WeightMatrix,
                         associated_matrix, matrix_from_rows, omega_s,
                         omega_table)


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def atomic_write_text(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def dump_json(path: str, payload) -> None:
    atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=1,
                                       default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_csv(path: str, columns: dict) -> None:
    keys = list(columns)
    rows = zip(*[np.atleast_1d(columns[k]) for k in keys])
    lines = [",".join(keys)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


# -- spec loaders ---------------------------------------------------------------

def sequence_from_spec(spec: dict, K_default: int = 512) -> WeightSequence:
    return make_sequence(spec, K=K_default)


def weight_function_from_spec(spec: dict) -> WeightFunction:
    kind = spec.get("kind")
    if kind == "omega_s":
        return omega_s(float(spec["s"]))
    if kind == "table":
        return omega_table(spec["points"])
    raise SequenceSpecError(f"unknown weight function kind {kind!r}",
                            code="NON_POSITIVE")


def matrix_from_spec(spec: dict, K_default: int = 512):
    """Returns (matrix, weight_function_or_None)."""
    kind = spec.get("kind")
    K = int(spec.get("K", K_default))
    if kind == "rows":
        rows = [make_sequence(s, K=K) for s in spec["rows"]]
        params = spec.get("params")
        return matrix_from_rows(rows, params=params), None
    w = weight_function_from_spec(spec)
    params = spec.get("params", list(DEFAULT_PARAMS))
    return associated_matrix(w, params=params, K=K), w


def jet_from_file(spec: dict, p_default: int = 16) -> Jet:
    if "kind" in spec and "values" not in spec:
        E = CompactSet1D(points=tuple(spec.get("points", ())),
                         intervals=tuple(tuple(iv) for iv in spec.get("intervals", ())))
        from .jets import sample_jet
        return sample_jet(spec, E, p_max=int(spec.get("order_cap", p_default)))
    E = CompactSet1D(points=tuple(spec.get("points", ())),
                     intervals=tuple(tuple(iv) for iv in spec.get("intervals", ())))
    cap = int(spec["order_cap"])
    carried = E.carried_points()
    values = spec["values"]
    if len(values) != len(carried):
        raise SequenceSpecError(
            f"jet file carries {len(values)} value rows for {len(carried)} points",
            code="NON_POSITIVE")
    table = {float(a): np.asarray(v, dtype=float) for a, v in zip(carried, values)}
    return Jet(E, cap, table)


def jet_to_dict(F: Jet) -> dict:
    carried = F.carried()
    return {
        "points": list(F.E.points),
        "intervals": [list(iv) for iv in F.E.intervals],
        "order_cap": F.order_cap,
        "values": [F.values[float(a)].tolist() for a in carried],
    }


# -- canned exports ---------------------------------------------------------------

def sequence_csv_columns(M: WeightSequence) -> dict:
    k = np.arange(M.K + 1)
    log_mu = np.concatenate([[0.0], M.log_mu])
    with np.errstate(over="ignore"):
        return {
            "k": k,
            "logM": M.log_M,
            "mu": np.exp(np.minimum(log_mu, 709.0)),
            "m": np.exp(np.minimum(M.log_m_small, 709.0)),
            "log_mu": log_mu,
            "log_m": M.log_m_small,
        }


def matrix_csv_columns(mat: WeightMatrix) -> dict:
    cols = {"k": np.arange(mat.K + 1)}
    for p, row in zip(mat.params, mat.rows):
        cols[f"logW[x={p:g}]"] = row.log_M
    return cols


def descendant_csv_columns(N: WeightSequence, D) -> dict:
    rows = D.to_rows()
    with np.errstate(over="ignore"):
        nu = np.exp(np.minimum(np.cumsum(N.log_mu)[: D.K_eff], 709.0))
    return {"k": rows["k"], "nu": nu, "tau": rows["tau"], "sigma": rows["sigma"],
            "sigma_star": rows["sigma_star"], "s": rows["s"]}


def ppoly_csv_columns(pp) -> dict:
    """Flat spline table: piece index, breakpoints, then coefficients."""
    deg = pp.degree
    n = len(pp.coeffs)
    cols = {"piece": np.arange(n),
            "left": pp.breakpoints[:-1], "right": pp.breakpoints[1:]}
    for j in range(deg + 1):
        cols[f"c{j}"] = np.array([c[j] if j < len(c) else 0.0 for c in pp.coeffs])
    return cols
