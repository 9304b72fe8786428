"""Self-contained invariant and benchmark suite behind ``bloch-thermo verify``.

Each check raises ``AssertionError`` on failure and returns a short detail
string on success. Random draws use fixed seeds so runs are reproducible.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bloch import (
    LN2,
    BlochState,
    LocalField,
    bloch_to_matrix,
    effective_temperature,
    energy,
    entropy,
    entropy_of_modulus,
    from_density,
    isothermal_f,
    matrix_to_bloch,
    thermal_state,
    to_density,
)
from .cycles import (
    CarnotSpec,
    OttoSpec,
    build_carnot,
    build_otto,
    entropy_production,
    otto_analytics,
    run_cycle,
)
from .dynamics import (
    PurifyingDissipator,
    SigmaXDissipator,
    SpectralDissipator,
    UnitaryRotation,
    bloch_path_of,
    contract_isochoric,
    evolve_density_oracle,
    evolve_lindblad,
    isothermal_path,
    oracle_integrate,
    purify_isochoric,
    rk4_affine,
    rotate_isentropic,
    stack_operators,
)
from .ledger import _split_rates, integrate_ledger, trajectory_rates

OTTO_BENCH = OttoSpec(theta1=math.pi / 3, theta2=math.pi / 6, B0=0.4, B1=0.8)
CARNOT_BENCH = CarnotSpec(T_H=0.6, T_L=0.3, B0=0.4, B1=0.8)
FIELD = LocalField.along_z(1.0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


CHECKS: list[tuple[str, Callable[[], str]]] = []


def check(name: str):
    def register(fn):
        CHECKS.append((name, fn))
        return fn
    return register


def _close(value, expected, tol, what):
    err = abs(value - expected)
    assert err <= tol, f"{what}: |{value!r} - {expected!r}| = {err:.3g} > {tol:g}"
    return err


# ---------------------------------------------------------------- bloch-core

@check("bloch: entropy endpoints and f(B) + S(B) = ln 2 on a 1000-point grid")
def _entropy_identity():
    _close(entropy(BlochState((0, 0, 0))), LN2, 1e-15, "S(0)")
    assert entropy(BlochState((0, 0, 1))) == 0.0
    B = np.linspace(0.0, 1.0, 1000, endpoint=False)
    S = entropy_of_modulus(B)
    worst = np.max(np.abs(isothermal_f(B) + S - LN2))
    assert worst <= 1e-12, f"identity residual {worst:.3g}"
    assert np.all(np.diff(S[1:]) < 0), "S not strictly decreasing"
    return f"max residual {worst:.2e}"


@check("bloch: density round trip, eigenvalues and tr(rho H) = -b.v")
def _density_round_trip():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(200):
        b = rng.normal(size=3)
        b *= rng.uniform(0, 1) / np.linalg.norm(b)
        s = BlochState(tuple(b))
        rho = to_density(s)
        fld = LocalField(tuple(rng.normal(size=3)))
        worst = max(worst, np.max(np.abs(from_density(rho).vector - b)),
                    abs(np.real(np.trace(rho.matrix @ fld.hamiltonian())) - energy(s, fld)))
        B = np.linalg.norm(b)
        worst = max(worst, np.max(np.abs(np.linalg.eigvalsh(rho.matrix) - [(1 - B) / 2, (1 + B) / 2])))
    assert worst <= 1e-12, f"worst deviation {worst:.3g}"
    return f"worst deviation {worst:.2e}"


@check("bloch: effective temperature recovers Boltzmann T and carries the sign of cos(theta)")
def _thermal_temperature():
    worst = 0.0
    # beyond eps/(k_B T) ~ 6 the double nearest tanh(.) no longer pins T to 1e-12
    for x in np.geomspace(0.02, 6.0, 200):
        for eps in (0.5, 1.0, 3.0):
            T = eps / x
            fld = LocalField.along_z(eps)
            worst = max(worst, abs(effective_temperature(thermal_state(T, fld), fld) / T - 1))
    assert worst <= 1e-12, f"relative error {worst:.3g}"
    for theta in np.linspace(0.05, math.pi - 0.05, 50):
        T = effective_temperature(BlochState.from_polar(0.5, theta), FIELD)
        assert (T < 0) == (math.cos(theta) < 0)
    return f"worst relative error {worst:.2e}"


# ---------------------------------------------------------- stroke-dynamics

def _random_generators(kind: str, rng, n: int):
    if kind == "rotation":
        out = []
        for _ in range(n):
            omega = rng.uniform(0.3, 2.0) * rng.choice([-1, 1])
            out.append(UnitaryRotation(tuple(rng.normal(size=3)), omega))
        return out
    if kind == "sigma_x":
        return [SigmaXDissipator(rng.uniform(0.1, 2.0)) for _ in range(n)]
    if kind == "purifying":
        return [PurifyingDissipator(tuple(rng.normal(size=3)), rng.uniform(0.1, 2.0)) for _ in range(n)]
    if kind == "spectral":
        out = []
        for _ in range(n):
            b = rng.normal(size=3)
            b *= rng.uniform(0, 0.99) / np.linalg.norm(b)
            out.append(SpectralDissipator(bloch_to_matrix(b), rng.uniform(0.1, 2.0)))
        return out
    raise ValueError(kind)


def _random_yz_states(rng, n):
    r = rng.uniform(0.05, 0.95, n)
    phi = rng.uniform(0, 2 * np.pi, n)
    return np.column_stack([np.zeros(n), r * np.sin(phi), r * np.cos(phi)])


VARIANTS = ("rotation", "sigma_x", "purifying", "spectral")


@check("acceptance 7a: Bloch RK4 vs density-matrix oracle, 100 random pairs per generator, step 1e-3")
def _dual_representation():
    rng = np.random.default_rng(7)
    details = []
    for kind in VARIANTS:
        gens = _random_generators(kind, rng, 100)
        b0 = _random_yz_states(rng, 100)
        affine = [g.bloch_affine() for g in gens]
        M = np.array([a[0] for a in affine])
        c = np.array([a[1] for a in affine])
        bloch = rk4_affine(M, c, b0, 1e-3, 1000)
        H, L = stack_operators(gens)
        rho = oracle_integrate(H, L, bloch_to_matrix(b0), 1e-3, 1000)
        dist = 0.5 * np.max(np.linalg.norm(matrix_to_bloch(rho) - bloch, axis=-1))
        trace_err = np.max(np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1))
        min_eig = np.min(np.linalg.eigvalsh(rho[-1]))
        assert dist <= 1e-8, f"{kind}: trace distance {dist:.3g}"
        assert trace_err <= 1e-10 and min_eig >= -1e-10, f"{kind}: trace/positivity violated"
        details.append(f"{kind} {dist:.1e}")
    # public single-run entry points on one pair per variant
    for kind in VARIANTS:
        g = _random_generators(kind, rng, 1)[0]
        s = BlochState(tuple(_random_yz_states(rng, 1)[0]))
        a = evolve_lindblad(g, s, 1.0, 1e-3).b
        o = bloch_path_of(evolve_density_oracle(g, to_density(s), 1.0, 1e-3))
        assert 0.5 * np.max(np.linalg.norm(a - o, axis=1)) <= 1e-8
    return "max trace distance: " + ", ".join(details)


@check("acceptance 7b: RK4 endpoint error drops by a factor in [12, 20] when the step halves")
def _convergence_order():
    b0 = np.array([0.0, 0.5, 0.6])
    gens = {
        "rotation": UnitaryRotation((1.0, 0.0, 0.0), 1.5),
        "sigma_x": SigmaXDissipator(0.7),
        "purifying": PurifyingDissipator((0.0, 0.6, 0.8), 1.2),
        "spectral": SpectralDissipator(bloch_to_matrix([0.1, 0.2, -0.3]), 1.3),
    }
    ratios = []
    for kind, g in gens.items():
        exact = g.propagate(b0, [1.0])[0]
        M, c = g.bloch_affine()
        e1 = np.linalg.norm(rk4_affine(M, c, b0, 0.1, 10)[-1] - exact)
        e2 = np.linalg.norm(rk4_affine(M, c, b0, 0.05, 20)[-1] - exact)
        ratio = e1 / e2
        assert 12 <= ratio <= 20, f"{kind}: ratio {ratio:.2f}"
        ratios.append(f"{kind} {ratio:.2f}")
    return ", ".join(ratios)


@check("dynamics: integrator reproduces closed-form strokes to 1e-9 at step 1e-3")
def _integrator_vs_closed_form():
    start = BlochState((0.0, 0.0, 0.8))
    rot = evolve_lindblad(UnitaryRotation((1, 0, 0), 1.0), start, math.pi / 2, 1e-3)
    _close(np.linalg.norm(rot.b[-1] - [0, -0.8, 0]), 0.0, 1e-10, "rotation end")
    worst = np.max(np.abs(rot.modulus - 0.8))
    assert worst <= 1e-10
    con = evolve_lindblad(SigmaXDissipator(0.5), start, math.log(2), 1e-3)
    _close(np.linalg.norm(con.b[-1] - [0, 0, 0.4]), 0.0, 1e-9, "contraction end")
    closed = contract_isochoric(start, 0.4, 0.5, samples=len(con))
    _close(np.max(np.abs(closed.b - con.b)), 0.0, 1e-9, "contraction path")
    pur = purify_isochoric(BlochState((0, 0, 0.4)), 0.8, 1.0)
    _close(pur.duration, math.log(3), 1e-15, "purify duration")
    num = evolve_lindblad(pur.generator, pur.start, pur.duration, 1e-3)
    _close(np.linalg.norm(num.b[-1] - pur.b[-1]), 0.0, 1e-9, "purify end")
    return "rotation, contraction and purification agree"


def _radial_drift(traj):
    d0 = traj.b[0] / np.linalg.norm(traj.b[0])
    cross = np.linalg.norm(np.cross(traj.b, d0), axis=1)
    return float(np.max(np.arctan2(cross, traj.b @ d0)))


@check("acceptance 8a: isentropic strokes keep S to 1e-12, radial strokes keep direction to 1e-9")
def _structural():
    worst_S, worst_dir = 0.0, 0.0
    for plan in (build_otto(OTTO_BENCH), build_otto(OTTO_BENCH, "spectral"), build_carnot(CARNOT_BENCH)):
        report = run_cycle(plan)
        for r in report.strokes:
            if r.stroke.kind == "isentropic":
                S = entropy_of_modulus(r.trajectory.modulus)
                worst_S = max(worst_S, float(np.max(np.abs(S - S[0]))))
            elif r.stroke.kind == "isochoric":
                worst_dir = max(worst_dir, _radial_drift(r.trajectory))
    rng = np.random.default_rng(3)
    for b in _random_yz_states(rng, 50):
        s = BlochState(tuple(b))
        B = s.modulus()
        traj = rotate_isentropic(s, rng.uniform(-1, 1), 2001)
        worst_S = max(worst_S, float(np.max(np.abs(entropy_of_modulus(traj.modulus) - entropy(s)))))
        worst_dir = max(worst_dir, _radial_drift(contract_isochoric(s, 0.5 * B, 1.0, 2001)),
                        _radial_drift(purify_isochoric(s, 0.5 * (1 + B), 1.0, 2001)))
    assert worst_S <= 1e-12, f"entropy drift {worst_S:.3g}"
    assert worst_dir <= 1e-9, f"direction drift {worst_dir:.3g}"
    return f"entropy drift {worst_S:.1e}, angular drift {worst_dir:.1e}"


@check("dynamics: isothermal samples sit at the reservoir temperature")
def _isothermal_temperature():
    traj = isothermal_path(0.6, math.acos(0.6591673732008658), math.acos(0.2541893581161611), FIELD)
    _close(traj.modulus[0], 0.8, 1e-12, "B start")
    _close(traj.modulus[-1], 0.4, 1e-12, "B end")
    T = [effective_temperature(traj.state(k), FIELD) for k in range(0, len(traj), 97)]
    worst = max(abs(x - 0.6) for x in T)
    assert worst <= 1e-9
    return f"worst temperature error {worst:.1e}"


# ------------------------------------------------------------- thermo-ledger

@check("ledger: rates sum to dE/dt pointwise; time-varying field enters as W")
def _rate_consistency():
    rng = np.random.default_rng(11)
    b = rng.normal(size=(500, 3))
    b *= rng.uniform(0.05, 1, (500, 1)) / np.linalg.norm(b, axis=1, keepdims=True)
    db = rng.normal(size=(500, 3))
    v = rng.normal(size=(500, 3))
    dv = rng.normal(size=(500, 3))
    worst = 0.0
    for k in range(500):
        Q, W, C = _split_rates(b[k], db[k], v[k], dv[k])
        total = -(db[k] @ v[k]) - (b[k] @ dv[k])
        worst = max(worst, abs(Q + W + C - total))
    assert worst <= 1e-12, f"rate residual {worst:.3g}"
    return f"worst residual {worst:.1e}"


@check("ledger: closed forms for isentropic, isochoric and isothermal strokes")
def _ledger_closed_forms():
    iso = integrate_ledger(rotate_isentropic(BlochState.from_polar(0.8, math.pi / 3), -math.pi / 6), FIELD)
    _close(iso.C, -0.8 * (math.cos(math.pi / 6) - math.cos(math.pi / 3)), 1e-8, "isentropic C")
    _close(iso.Q, 0.0, 1e-12, "isentropic Q")
    ch = integrate_ledger(contract_isochoric(BlochState.from_polar(0.8, math.pi / 6), 0.4), FIELD)
    _close(ch.Q, math.cos(math.pi / 6) * 0.4, 1e-8, "isochoric Q")
    _close(ch.C, 0.0, 1e-12, "isochoric C")
    th = integrate_ledger(isothermal_path(0.6, math.acos(0.6 * math.atanh(0.8)),
                                          math.acos(0.6 * math.atanh(0.4)), FIELD), FIELD)
    _close(th.Q, 0.6 * float(isothermal_f(0.8) - isothermal_f(0.4)), 1e-8, "isothermal Q")
    _close(th.C, 0.3 * math.log(0.84 / 0.36), 1e-8, "isothermal C")
    return "all three stroke types match"


@check("acceptance 9: re-timing the isothermal path (linear vs quadratic schedule) changes Q, C by <= 1e-6")
def _reparameterization():
    a = (math.acos(0.6 * math.atanh(0.8)), math.acos(0.6 * math.atanh(0.4)))
    lin = integrate_ledger(isothermal_path(0.6, *a, FIELD, schedule="linear"), FIELD)
    quad = integrate_ledger(isothermal_path(0.6, *a, FIELD, schedule="quadratic"), FIELD)
    dQ, dC = abs(lin.Q - quad.Q), abs(lin.C - quad.C)
    assert max(dQ, dC) <= 1e-6, f"dQ {dQ:.3g}, dC {dC:.3g}"
    return f"dQ {dQ:.1e}, dC {dC:.1e}"


@check("ledger: exact 1-forms also hold with finite-difference rates")
def _finite_difference_rates():
    from .dynamics import Trajectory
    traj = isothermal_path(0.6, math.acos(0.6 * math.atanh(0.8)), math.acos(0.6 * math.atanh(0.4)), FIELD)
    bare = Trajectory(traj.t, traj.b)
    assert np.max(np.abs(trajectory_rates(bare) - traj.rates)) < 1e-5
    a, b = integrate_ledger(traj, FIELD), integrate_ledger(bare, FIELD)
    assert abs(a.Q - b.Q) <= 1e-6 and abs(a.C - b.C) <= 1e-6
    return f"dQ {abs(a.Q - b.Q):.1e}"


# -------------------------------------------------------------- cycle-engine

@check("acceptance 1: Otto benchmark efficiency, simulated vs 0.4226497 within 1e-6 relative, < 1 s")
def _acc_otto_eta():
    t0 = time.perf_counter()
    report = run_cycle(build_otto(OTTO_BENCH))
    elapsed = time.perf_counter() - t0
    _close(report.analytics.efficiency, 0.42264973081037424, 1e-12, "analytic eta")
    _close(report.efficiency / report.analytics.efficiency, 1.0, 1e-6, "relative eta")
    assert elapsed < 1.0, f"took {elapsed:.2f} s"
    return f"eta {report.efficiency:.10f} in {elapsed:.3f} s"


@check("acceptance 2: Otto per-stroke ledgers within 1e-6")
def _acc_otto_strokes():
    report = run_cycle(build_otto(OTTO_BENCH))
    expected = {"1->2": ("C", -0.29282032302755092), "2->3": ("Q", 0.34641016151377546),
                "3->4": ("C", 0.14641016151377546), "4->1": ("Q", -0.2)}
    for r in report.strokes:
        key, value = expected[r.stroke.label]
        _close(getattr(r.ledger, key), value, 1e-6, f"{key} {r.stroke.label}")
        assert abs(r.delta_Q) <= 1e-6 and abs(r.delta_C) <= 1e-6
    return "C12, Q23, C34, Q41 match"


@check("acceptance 3: Carnot benchmark efficiency 0.5 and isothermal ledger")
def _acc_carnot():
    report = run_cycle(build_carnot(CARNOT_BENCH))
    _close(report.analytics.efficiency, 0.5, 1e-6, "analytic eta")
    _close(report.efficiency, 0.5, 1e-6, "simulated eta")
    hot = report.strokes[1].ledger
    _close(hot.Q, 0.17146879719806713, 1e-6, "Q23")
    _close(hot.C, 0.25418935811616108, 1e-6, "C23")
    a = report.analytics
    _close(a.Q_H / a.T_H + a.exchanges["4->1"]["Q"] / a.T_L, 0.0, 1e-9, "reversibility")
    return f"eta {report.efficiency:.12f}"


@check("acceptance 4: entropy production, Otto 0.2699854 and Carnot 0")
def _acc_sgen():
    otto = run_cycle(build_otto(OTTO_BENCH))
    ref = 0.26998534338980315
    _close(entropy_production(otto, "analytic"), ref, 1e-8, "Otto analytic S_gen")
    _close(entropy_production(otto), ref, 1e-6, "Otto simulated S_gen")
    carnot = run_cycle(build_carnot(CARNOT_BENCH))
    _close(entropy_production(carnot, "analytic"), 0.0, 1e-8, "Carnot analytic S_gen")
    _close(entropy_production(carnot), 0.0, 1e-8, "Carnot simulated S_gen")
    return f"Otto {entropy_production(otto):.10f}, Carnot {entropy_production(carnot):.1e}"


def random_otto_specs(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    specs = []
    while len(specs) < n:
        t = np.sort(rng.uniform(0, math.pi / 2, 2))
        b = np.sort(rng.uniform(0, 1, 2))
        if t[0] < t[1] and 0 < b[0] < b[1] < 1:
            specs.append(OttoSpec(theta1=float(t[1]), theta2=float(t[0]), B0=float(b[0]),
                                  B1=float(b[1]), epsilon=float(rng.uniform(0.2, 5))))
    return specs


@check("acceptance 5: identity suite over 1000 random Otto specs, < 10 s")
def _acc_identities():
    t0 = time.perf_counter()
    worst_s, worst_a = 0.0, 0.0
    for spec in random_otto_specs(1000):
        a = otto_analytics(spec)
        assert a.eta_carnot_bound >= a.efficiency, f"bound violated for {spec}"
        assert a.S_gen >= 0
        worst_s = max(worst_s, abs(a.efficiency - (a.eta_carnot_bound - a.T_L * a.S_gen / a.Q_H)))
        worst_a = max(worst_a, abs(a.eta_carnot_bound - (1 - a.alpha * (1 - a.efficiency))))
    elapsed = time.perf_counter() - t0
    assert worst_s <= 1e-9 and worst_a <= 1e-9, f"residuals {worst_s:.3g}, {worst_a:.3g}"
    assert elapsed < 10
    return f"residuals {worst_s:.1e} / {worst_a:.1e} in {elapsed:.2f} s"


@check("acceptance 6: first law to 1e-8 eps and Clausius to 1e-6 k_B on every benchmark stroke")
def _acc_first_law():
    worst_e, worst_c = 0.0, 0.0
    for plan in (build_otto(OTTO_BENCH), build_carnot(CARNOT_BENCH)):
        report = run_cycle(plan)
        for r in report.strokes:
            worst_e = max(worst_e, abs(r.ledger.residual_first_law))
            worst_c = max(worst_c, abs(r.ledger.residual_clausius))
        assert abs(report.closure_dE) <= 1e-8 and abs(report.closure_dS) <= 1e-8
        assert abs(report.closure_QC) <= 1e-7
    assert worst_e <= 1e-8 and worst_c <= 1e-6, f"residuals {worst_e:.3g}, {worst_c:.3g}"
    return f"first law {worst_e:.1e}, Clausius {worst_c:.1e}"


@check("acceptance 8b: both stroke 4->1 realizations give ledgers equal to 1e-8")
def _acc_realizations():
    a = run_cycle(build_otto(OTTO_BENCH, "purify")).strokes[3].ledger
    b = run_cycle(build_otto(OTTO_BENCH, "spectral")).strokes[3].ledger
    diff = max(abs(a.Q - b.Q), abs(a.C - b.C), abs(a.dE - b.dE), abs(a.dS - b.dS))
    assert diff <= 1e-8, f"ledger difference {diff:.3g}"
    return f"difference {diff:.1e}"


@check("cycles: eta_Otto independent of radii; epsilon scaling; S_gen rectangle monotonicity")
def _cycle_properties():
    base = otto_analytics(OTTO_BENCH)
    other = otto_analytics(OttoSpec(OTTO_BENCH.theta1, OTTO_BENCH.theta2, 0.1, 0.95))
    assert abs(base.efficiency - other.efficiency) <= 1e-12
    scaled = otto_analytics(OttoSpec(OTTO_BENCH.theta1, OTTO_BENCH.theta2, 0.4, 0.8, epsilon=3.5))
    for label, ex in base.exchanges.items():
        for key in ("Q", "C"):
            assert abs(scaled.exchanges[label][key] - 3.5 * ex[key]) <= 1e-12
    for attr in ("efficiency", "eta_carnot_bound", "S_gen"):
        assert abs(getattr(scaled, attr) - getattr(base, attr)) <= 1e-12
    dB = 0.1
    sg = [otto_analytics(OttoSpec(1.0, 0.5, b0, b0 + dB)).S_gen for b0 in np.linspace(0.01, 0.89, 60)]
    assert np.all(np.diff(sg) > 0), "S_gen not increasing towards B = 1"
    return "all hold"


# --------------------------------------------------------------- cycle-cli

@check("acceptance 10: CLI output is byte-identical across runs and JSON round-trips")
def _acc_cli_determinism():
    import json

    from .serialize import TRAJECTORY_COLUMNS, render_csv, render_json, report_summary, trajectory_rows, validate_summary
    outs = []
    for _ in range(2):
        report = run_cycle(build_otto(OTTO_BENCH), 2001)
        outs.append((render_json(report_summary(report, 2001)),
                     render_csv(TRAJECTORY_COLUMNS, trajectory_rows(report))))
    assert outs[0] == outs[1], "outputs differ between identical runs"
    bad = validate_summary(json.loads(outs[0][0]))
    assert not bad, f"round-trip mismatches: {bad}"
    return f"{len(outs[0][0]) + len(outs[0][1])} bytes identical"


def run_all(echo: Callable[[str], None] | None = None) -> list[CheckResult]:
    results = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            detail, ok = fn(), True
        except AssertionError as exc:
            detail, ok = str(exc) or "assertion failed", False
        except Exception as exc:  # a crash is a failed check, not an aborted suite
            detail, ok = f"{type(exc).__name__}: {exc}", False
        res = CheckResult(name, ok, detail, time.perf_counter() - t0)
        results.append(res)
        if echo is not None:
            echo(f"{'PASS' if ok else 'FAIL'}  {name}  [{detail}] ({res.seconds:.2f} s)")
    return results
