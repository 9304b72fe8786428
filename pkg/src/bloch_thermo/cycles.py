"""Otto and Carnot cycles of a qubit with a fixed local field ``v = eps z``.

States live in the b_x = 0 plane, ``b = B (0, sin theta, cos theta)``.
Energy exchanges are signed from the system's side: positive heat enters
the qubit, negative coherence work leaves it. ``C_net`` and efficiencies
are reported as magnitudes, matching the engine convention
``eta = |C_net| / Q_H``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bloch import BlochState, LocalField, isothermal_f
from .dynamics import (
    DEFAULT_SAMPLES,
    Trajectory,
    contract_isochoric,
    isothermal_path,
    purify_isochoric,
    rotate_isentropic,
    spectral_isochoric,
)
from .errors import InfeasibleGeometry, InvalidSpec, MissingReservoir
from .ledger import EnergyLedger, integrate_ledger

CHAIN_TOL = 1e-9
REALIZATIONS = ("purify", "spectral")


def _require(cond: bool, message: str, name: str) -> None:
    if not cond:
        raise InvalidSpec(message, field=name)


def _check_common(epsilon, k_B, B0, B1):
    for name, value in (("epsilon", epsilon), ("k_B", k_B), ("B0", B0), ("B1", B1)):
        _require(isinstance(value, (int, float)) and math.isfinite(value),
                 f"{name} must be a finite number", name)
    _require(epsilon > 0, "epsilon must be positive", "epsilon")
    _require(k_B > 0, "k_B must be positive", "k_B")
    _require(0 < B0 < 1, "B0 must lie in (0, 1)", "B0")
    _require(0 < B1 < 1, "B1 must lie in (0, 1)", "B1")
    _require(B0 < B1, "B0 must be smaller than B1", "B1")


@dataclass(frozen=True)
class OttoSpec:
    """Otto cycle geometry; angles in radians with ``0 <= theta2 < theta1 < pi/2``."""

    theta1: float
    theta2: float
    B0: float
    B1: float
    epsilon: float = 1.0
    k_B: float = 1.0

    def __post_init__(self):
        _check_common(self.epsilon, self.k_B, self.B0, self.B1)
        for name in ("theta1", "theta2"):
            _require(math.isfinite(getattr(self, name)), f"{name} must be finite", name)
        _require(0 <= self.theta2, "theta2 must be non-negative", "theta2")
        _require(self.theta1 < math.pi / 2, "theta1 must be below pi/2", "theta1")
        _require(self.theta2 < self.theta1, "theta2 must be smaller than theta1", "theta2")


@dataclass(frozen=True)
class CarnotSpec:
    """Carnot cycle fixed by its reservoir temperatures and the two isentropic radii."""

    T_H: float
    T_L: float
    B0: float
    B1: float
    epsilon: float = 1.0
    k_B: float = 1.0

    def __post_init__(self):
        _check_common(self.epsilon, self.k_B, self.B0, self.B1)
        for name in ("T_H", "T_L"):
            _require(math.isfinite(getattr(self, name)), f"{name} must be finite", name)
        _require(self.T_L > 0, "T_L must be positive", "T_L")
        _require(self.T_H > self.T_L, "T_H must exceed T_L", "T_L")
        c = self.cosines
        if not all(0 < ci <= 1 for ci in c):
            raise InfeasibleGeometry(
                f"derived cos(theta) = {max(c)!r} > 1; need k_B T_H artanh(B1) <= epsilon", field="T_H")

    @property
    def cosines(self) -> tuple[float, float, float, float]:
        a1, a0 = math.atanh(self.B1), math.atanh(self.B0)
        s = self.k_B / self.epsilon
        return (s * self.T_L * a1, s * self.T_H * a1, s * self.T_H * a0, s * self.T_L * a0)

    @property
    def thetas(self) -> tuple[float, float, float, float]:
        return tuple(math.acos(c) for c in self.cosines)


@dataclass(frozen=True)
class Stroke:
    """One leg of a cycle.

    ``mechanism`` is one of ``rotate``, ``contract``, ``purify``, ``spectral``
    or ``isothermal``; ``role`` marks the hot/cold reservoir contact.
    """

    label: str
    kind: str
    mechanism: str
    start: BlochState
    end: BlochState
    reservoir: float | None = None
    role: str | None = None
    rate: float = 1.0
    temperature: float | None = None


@dataclass(frozen=True)
class CyclePlan:
    kind: str
    spec: OttoSpec | CarnotSpec
    strokes: tuple[Stroke, ...]
    realization: str = "purify"

    def __post_init__(self):
        n = len(self.strokes)
        for i, s in enumerate(self.strokes):
            nxt = self.strokes[(i + 1) % n]
            gap = np.linalg.norm(np.subtract(s.end.b, nxt.start.b))
            if gap > CHAIN_TOL:
                raise InvalidSpec(f"stroke {s.label} does not meet {nxt.label} (gap {gap:.3g})")

    @property
    def field(self) -> LocalField:
        return LocalField.along_z(self.spec.epsilon)

    @property
    def k_B(self) -> float:
        return self.spec.k_B


def _polar(state: BlochState) -> float:
    return math.atan2(state.b[1], state.b[2])


def build_otto(spec: OttoSpec, realization: str = "purify", gamma: float = 1.0,
               lam: float = 1.0) -> CyclePlan:
    """Four-stroke Otto plan; reservoirs are the state-3 (hot) and state-1 (cold) temperatures."""
    if realization not in REALIZATIONS:
        raise InvalidSpec(f"unknown realization {realization!r}", field="realization")
    a = otto_analytics(spec)
    s1 = BlochState.from_polar(spec.B1, spec.theta1)
    s2 = BlochState.from_polar(spec.B1, spec.theta2)
    s3 = BlochState.from_polar(spec.B0, spec.theta2)
    s4 = BlochState.from_polar(spec.B0, spec.theta1)
    strokes = (
        Stroke("1->2", "isentropic", "rotate", s1, s2),
        Stroke("2->3", "isochoric", "contract", s2, s3, a.T_H, "hot", gamma),
        Stroke("3->4", "isentropic", "rotate", s3, s4),
        Stroke("4->1", "isochoric", realization, s4, s1, a.T_L, "cold", lam),
    )
    return CyclePlan("otto", spec, strokes, realization)


def build_carnot(spec: CarnotSpec) -> CyclePlan:
    th1, th2, th3, th4 = spec.thetas
    s1 = BlochState.from_polar(spec.B1, th1)
    s2 = BlochState.from_polar(spec.B1, th2)
    s3 = BlochState.from_polar(spec.B0, th3)
    s4 = BlochState.from_polar(spec.B0, th4)
    strokes = (
        Stroke("1->2", "isentropic", "rotate", s1, s2),
        Stroke("2->3", "isothermal", "isothermal", s2, s3, spec.T_H, "hot", temperature=spec.T_H),
        Stroke("3->4", "isentropic", "rotate", s3, s4),
        Stroke("4->1", "isothermal", "isothermal", s4, s1, spec.T_L, "cold", temperature=spec.T_L),
    )
    return CyclePlan("carnot", spec, strokes)


def realize_stroke(stroke: Stroke, field: LocalField, k_B: float = 1.0,
                   samples: int = DEFAULT_SAMPLES) -> Trajectory:
    m = stroke.mechanism
    target = stroke.end.modulus()
    if m == "rotate":
        delta = _polar(stroke.end) - _polar(stroke.start)
        return rotate_isentropic(stroke.start, delta, samples, stroke.rate)
    if m == "contract":
        return contract_isochoric(stroke.start, target, stroke.rate, samples)
    if m == "purify":
        return purify_isochoric(stroke.start, target, stroke.rate, samples)
    if m == "spectral":
        return spectral_isochoric(stroke.start, target, stroke.rate, samples=samples)
    if m == "isothermal":
        return isothermal_path(stroke.temperature, _polar(stroke.start), _polar(stroke.end),
                               field, samples, k_B)
    raise InvalidSpec(f"unknown stroke mechanism {m!r}")


@dataclass(frozen=True)
class CycleAnalytics:
    """Closed-form results for one cycle.

    ``exchanges`` maps stroke labels to ``{"Q": ..., "C": ...}``. ``alpha``
    and ``residual_alpha_identity`` are Otto-only (None for Carnot).
    """

    kind: str
    exchanges: dict[str, dict[str, float]]
    Q_H: float
    C_net: float
    efficiency: float
    T_L: float
    T_H: float
    eta_carnot_bound: float
    S_gen: float
    residual_sgen_identity: float
    alpha: float | None = None
    residual_alpha_identity: float | None = None


def otto_analytics(spec: OttoSpec) -> CycleAnalytics:
    eps, k = spec.epsilon, spec.k_B
    c1, c2 = math.cos(spec.theta1), math.cos(spec.theta2)
    B0, B1 = spec.B0, spec.B1
    a0, a1 = math.atanh(B0), math.atanh(B1)
    exchanges = {
        "1->2": {"Q": 0.0, "C": eps * B1 * (c1 - c2)},
        "2->3": {"Q": eps * c2 * (B1 - B0), "C": 0.0},
        "3->4": {"Q": 0.0, "C": eps * B0 * (c2 - c1)},
        "4->1": {"Q": eps * c1 * (B0 - B1), "C": 0.0},
    }
    Q_H = exchanges["2->3"]["Q"]
    C_net = eps * (B1 - B0) * (c2 - c1)
    eta = 1.0 - c1 / c2
    T_L = eps * c1 / (k * a1)
    T_H = eps * c2 / (k * a0)
    alpha = a0 / a1
    eta_c = 1.0 - alpha * c1 / c2
    S_gen = k * (B1 - B0) * (a1 - a0)
    return CycleAnalytics(
        kind="otto", exchanges=exchanges, Q_H=Q_H, C_net=C_net, efficiency=eta,
        T_L=T_L, T_H=T_H, eta_carnot_bound=eta_c, S_gen=S_gen,
        residual_sgen_identity=eta - (eta_c - T_L * S_gen / Q_H),
        alpha=alpha, residual_alpha_identity=eta_c - (1.0 - alpha * (1.0 - eta)),
    )


def carnot_analytics(spec: CarnotSpec) -> CycleAnalytics:
    eps, k = spec.epsilon, spec.k_B
    B0, B1, TH, TL = spec.B0, spec.B1, spec.T_H, spec.T_L
    c1, c2, c3, c4 = spec.cosines
    df = float(isothermal_f(B1) - isothermal_f(B0))
    log_ratio = math.log((1.0 - B0 * B0) / (1.0 - B1 * B1))
    exchanges = {
        "1->2": {"Q": 0.0, "C": eps * B1 * (c1 - c2)},
        "2->3": {"Q": k * TH * df, "C": 0.5 * k * TH * log_ratio},
        "3->4": {"Q": 0.0, "C": eps * B0 * (c3 - c4)},
        "4->1": {"Q": -k * TL * df, "C": -0.5 * k * TL * log_ratio},
    }
    Q_H = k * TH * df
    eta = 1.0 - TL / TH
    S_gen = -exchanges["2->3"]["Q"] / TH - exchanges["4->1"]["Q"] / TL
    return CycleAnalytics(
        kind="carnot", exchanges=exchanges, Q_H=Q_H, C_net=k * (TH - TL) * df,
        efficiency=eta, T_L=TL, T_H=TH, eta_carnot_bound=eta, S_gen=S_gen,
        residual_sgen_identity=eta - (eta - TL * S_gen / Q_H),
    )


def analytics_for(spec) -> CycleAnalytics:
    return otto_analytics(spec) if isinstance(spec, OttoSpec) else carnot_analytics(spec)


@dataclass(frozen=True, eq=False)
class StrokeResult:
    stroke: Stroke
    trajectory: Trajectory = field(repr=False)
    ledger: EnergyLedger
    analytic_Q: float
    analytic_C: float

    @property
    def delta_Q(self) -> float:
        return self.ledger.Q - self.analytic_Q

    @property
    def delta_C(self) -> float:
        return self.ledger.C - self.analytic_C


@dataclass(frozen=True, eq=False)
class CycleReport:
    """Simulated cycle with its analytic counterpart attached."""

    plan: CyclePlan
    analytics: CycleAnalytics
    strokes: tuple[StrokeResult, ...]
    Q_H: float
    C_net: float
    efficiency: float
    S_gen: float
    closure_dE: float
    closure_dS: float
    closure_QC: float

    @property
    def efficiency_error(self) -> float:
        return self.efficiency - self.analytics.efficiency


def run_cycle(plan: CyclePlan, resolution: int = DEFAULT_SAMPLES) -> CycleReport:
    """Simulate every stroke of ``plan`` and integrate its ledger."""
    fld, k_B = plan.field, plan.k_B
    analytics = analytics_for(plan.spec)
    results = []
    for stroke in plan.strokes:
        traj = realize_stroke(stroke, fld, k_B, resolution)
        ledger = integrate_ledger(traj, fld, k_B)
        ex = analytics.exchanges[stroke.label]
        results.append(StrokeResult(stroke, traj, ledger, ex["Q"], ex["C"]))
    results = tuple(results)
    Q_H = sum(r.ledger.Q for r in results if r.stroke.role == "hot")
    C_total = sum(r.ledger.C for r in results)
    S_gen = _reservoir_entropy([(r.stroke, r.ledger.Q) for r in results], fld.epsilon)
    return CycleReport(
        plan=plan, analytics=analytics, strokes=results, Q_H=Q_H, C_net=abs(C_total),
        efficiency=abs(C_total) / Q_H, S_gen=S_gen,
        closure_dE=sum(r.ledger.dE for r in results),
        closure_dS=sum(r.ledger.dS for r in results),
        closure_QC=sum(r.ledger.Q + r.ledger.C for r in results),
    )


def _reservoir_entropy(pairs, epsilon: float) -> float:
    total = 0.0
    for stroke, Q in pairs:
        if stroke.reservoir is None:
            if abs(Q) > 1e-9 * epsilon:
                raise MissingReservoir(f"stroke {stroke.label} exchanges heat {Q!r} but has no reservoir")
            continue
        total -= Q / stroke.reservoir
    return total


def entropy_production(report: CycleReport, source: str = "simulated") -> float:
    """Total reservoir entropy change over one cycle (the system's own change is zero).

    ``source`` selects the simulated ledgers or the closed-form exchanges.
    """
    if source == "simulated":
        pairs = [(r.stroke, r.ledger.Q) for r in report.strokes]
    elif source == "analytic":
        pairs = [(r.stroke, report.analytics.exchanges[r.stroke.label]["Q"]) for r in report.strokes]
    else:
        raise ValueError(f"source must be 'simulated' or 'analytic', got {source!r}")
    return _reservoir_entropy(pairs, report.plan.spec.epsilon)
