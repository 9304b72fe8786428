"""Byte-stable CSV/JSON rendering of cycle reports and sweep rows.

Floats are always written with 17 significant digits, which round-trips
IEEE doubles exactly; keys keep insertion order.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict

import numpy as np

from . import __version__
from .bloch import entropy_of_modulus, temperature_of
from .cycles import CarnotSpec, CycleReport, OttoSpec, analytics_for
from .ledger import cumulative_ledger

SUMMARY_SCHEMA = "bloch_thermo.summary/1"
TRAJECTORY_COLUMNS = ("t", "bx", "by", "bz", "B", "theta_rad", "E", "S", "T_eff",
                      "Q_cum", "W_cum", "C_cum")
SWEEP_COLUMNS = ("cycle", "parameter", "value", "status", "reason", "eta_analytic",
                 "eta_simulated", "Q_H", "C_net", "S_gen_analytic", "S_gen_simulated",
                 "eta_carnot_bound", "T_L", "T_H")


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def render_json(obj, indent: int = 2) -> bytes:
    return (_encode(obj, indent, 0) + "\n").encode("utf-8")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def render_csv(columns, rows) -> bytes:
    """Plain comma-separated text; cells never contain commas by construction."""
    lines = [",".join(columns)]
    lines.extend(",".join(_cell(row[c]) for c in columns) for row in rows)
    return ("\n".join(lines) + "\n").encode("utf-8")


def _spec_dict(spec) -> dict:
    return {k: float(v) for k, v in asdict(spec).items()}


def _state_dict(state) -> dict:
    bx, by, bz = state.b
    return {"bx": bx, "by": by, "bz": bz, "B": state.modulus(), "theta_rad": math.atan2(by, bz)}


def analytics_dict(a) -> dict:
    out = {
        "Q_H": a.Q_H, "C_net": a.C_net, "efficiency": a.efficiency, "T_L": a.T_L, "T_H": a.T_H,
        "eta_carnot_bound": a.eta_carnot_bound, "S_gen": a.S_gen,
        "residual_sgen_identity": a.residual_sgen_identity,
        "alpha": a.alpha, "residual_alpha_identity": a.residual_alpha_identity,
        "exchanges": {label: dict(ex) for label, ex in a.exchanges.items()},
    }
    return out


def report_summary(report: CycleReport, resolution: int | None = None) -> dict:
    plan = report.plan
    if resolution is None:
        resolution = len(report.strokes[0].trajectory)
    kind = plan.kind
    geometry = {"states": {}}
    for i, r in enumerate(report.strokes, start=1):
        geometry["states"][str(i)] = _state_dict(r.stroke.start)
    if isinstance(plan.spec, CarnotSpec):
        geometry["cosines"] = list(plan.spec.cosines)
    strokes = []
    for r in report.strokes:
        s = r.stroke
        strokes.append({
            "label": s.label, "kind": s.kind, "mechanism": s.mechanism,
            "reservoir": s.reservoir, "duration": r.trajectory.duration,
            "simulated": r.ledger.as_dict(),
            "analytic": {"Q": r.analytic_Q, "C": r.analytic_C},
            "delta": {"Q": r.delta_Q, "C": r.delta_C},
        })
    return {
        "schema": SUMMARY_SCHEMA,
        "version": __version__,
        "cycle": kind,
        "realization": plan.realization if kind == "otto" else None,
        "resolution": int(resolution),
        "spec": _spec_dict(plan.spec),
        "geometry": geometry,
        f"eta_{kind}_analytic": report.analytics.efficiency,
        f"eta_{kind}_simulated": report.efficiency,
        "eta_abs_error": abs(report.efficiency_error),
        "strokes": strokes,
        "totals": {
            "Q_H": report.Q_H, "C_net": report.C_net, "closure_dE": report.closure_dE,
            "closure_dS": report.closure_dS, "closure_QC": report.closure_QC,
        },
        "entropy_production": {"analytic": report.analytics.S_gen, "simulated": report.S_gen},
        "analytic": analytics_dict(report.analytics),
    }


def summary_row(report: CycleReport, parameter: str = "", value=None) -> dict:
    a = report.analytics
    return {
        "cycle": report.plan.kind, "parameter": parameter, "value": value, "status": "ok",
        "reason": "", "eta_analytic": a.efficiency, "eta_simulated": report.efficiency,
        "Q_H": report.Q_H, "C_net": report.C_net, "S_gen_analytic": a.S_gen,
        "S_gen_simulated": report.S_gen, "eta_carnot_bound": a.eta_carnot_bound,
        "T_L": a.T_L, "T_H": a.T_H,
    }


def infeasible_row(cycle: str, parameter: str, value, reason: str) -> dict:
    row = {c: None for c in SWEEP_COLUMNS}
    # reasons end up in CSV cells
    row.update(cycle=cycle, parameter=parameter, value=value, status="infeasible",
               reason=reason.replace(",", ";").replace("\n", " "))
    return row


def trajectory_rows(report: CycleReport):
    """Stroke samples concatenated in cycle order with cumulative time and ledger."""
    plan = report.plan
    fld, k_B = plan.field, plan.k_B
    v = fld.vector
    t_off = 0.0
    acc = np.zeros(3)
    rows = []
    for r in report.strokes:
        traj = r.trajectory
        b = traj.b
        B = traj.modulus
        cos_t = (b @ fld.unit) / B
        with np.errstate(divide="ignore", invalid="ignore"):
            T = temperature_of(B, cos_t, fld.epsilon, k_B)
        cum = np.stack(cumulative_ledger(traj, fld), axis=1) + acc
        cols = np.column_stack([
            traj.t - traj.t[0] + t_off, b, B, np.arctan2(b[:, 1], b[:, 2]), -(b @ v),
            entropy_of_modulus(B, k_B), T, cum,
        ])
        rows.extend(dict(zip(TRAJECTORY_COLUMNS, row)) for row in cols.tolist())
        t_off += traj.duration
        acc = cum[-1]
    return rows


def render_output(obj, fmt: str) -> bytes:
    """Render a :class:`CycleReport` (json: summary, csv: trajectory) or a list of sweep rows."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    if isinstance(obj, CycleReport):
        if fmt == "json":
            return render_json(report_summary(obj))
        return render_csv(TRAJECTORY_COLUMNS, trajectory_rows(obj))
    rows = list(obj)
    return render_csv(SWEEP_COLUMNS, rows) if fmt == "csv" else render_json(rows)


def spec_from_summary(data: dict):
    spec = data["spec"]
    if data["cycle"] == "otto":
        return OttoSpec(**spec)
    if data["cycle"] == "carnot":
        return CarnotSpec(**spec)
    raise ValueError(f"unknown cycle {data['cycle']!r}")


def validate_summary(data: dict) -> list[str]:
    """Recompute the closed-form block from the stored spec; list every key that is not bit-identical."""
    if data.get("schema") != SUMMARY_SCHEMA:
        return [f"schema {data.get('schema')!r} != {SUMMARY_SCHEMA!r}"]
    expected = analytics_dict(analytics_for(spec_from_summary(data)))
    stored = data["analytic"]
    bad = []

    def compare(a, b, path):
        if isinstance(a, dict):
            for k in a:
                compare(a[k], b.get(k) if isinstance(b, dict) else None, f"{path}.{k}")
        elif a is None or b is None:
            if a is not b:
                bad.append(path)
        elif float(a) != float(b):
            bad.append(path)

    compare(expected, stored, "analytic")
    return bad


def load_summary(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
