import dataclasses
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bloch_thermo.bloch import BlochState
from bloch_thermo.cycles import (
    CarnotSpec,
    CyclePlan,
    OttoSpec,
    build_carnot,
    build_otto,
    carnot_analytics,
    entropy_production,
    otto_analytics,
    run_cycle,
)
from bloch_thermo.errors import InfeasibleGeometry, InvalidSpec, MissingReservoir

# mpmath (40 digits) evaluations of the closed forms at the benchmarks
OTTO = dict(eta=0.42264973081037424, Q_H=0.34641016151377546, C_net=0.14641016151377546,
            S_gen=0.26998534338980315, T_L=0.45511961331341870, T_H=2.0442053362171286,
            eta_c=0.77736110690541832)
CARNOT_COSINES = (0.32958368660043291, 0.65916737320086581, 0.25418935811616108, 0.12709467905808054)
CARNOT_C = {"1->2": -0.26366694928034633, "2->3": 0.25418935811616108,
            "3->4": 0.050837871623232217, "4->1": -0.12709467905808054}
CARNOT_C_NET = 0.08573439859903357

otto_specs = st.builds(
    lambda t2, dt, B0, dB: OttoSpec(theta1=t2 + dt, theta2=t2, B0=B0, B1=B0 + dB),
    st.floats(0.0, 1.2), st.floats(0.01, 0.35), st.floats(0.05, 0.6), st.floats(0.05, 0.35),
)


def test_otto_benchmark_analytics(otto_bench):
    a = otto_analytics(otto_bench)
    for name, value in [("efficiency", "eta"), ("Q_H", "Q_H"), ("C_net", "C_net"), ("S_gen", "S_gen"),
                        ("T_L", "T_L"), ("T_H", "T_H"), ("eta_carnot_bound", "eta_c")]:
        assert getattr(a, name) == pytest.approx(OTTO[value], rel=1e-14)


def test_carnot_benchmark_analytics(carnot_bench):
    assert carnot_bench.cosines == pytest.approx(CARNOT_COSINES, rel=1e-14)
    a = carnot_analytics(carnot_bench)
    assert {k: v["C"] for k, v in a.exchanges.items()} == pytest.approx(CARNOT_C, rel=1e-13)
    assert a.C_net == pytest.approx(CARNOT_C_NET, rel=1e-13)
    assert a.efficiency == 0.5
    assert abs(a.S_gen) < 1e-15


@pytest.mark.parametrize("kwargs, field", [
    (dict(theta1=0.5, theta2=0.5, B0=0.4, B1=0.8), "theta2"),
    (dict(theta1=math.pi / 2, theta2=0.5, B0=0.4, B1=0.8), "theta1"),
    (dict(theta1=1.0, theta2=0.5, B0=0.8, B1=0.4), "B1"),
    (dict(theta1=1.0, theta2=0.5, B0=0.0, B1=0.4), "B0"),
    (dict(theta1=1.0, theta2=0.5, B0=0.4, B1=1.0), "B1"),
    (dict(theta1=1.0, theta2=0.5, B0=0.4, B1=0.8, epsilon=0.0), "epsilon"),
])
def test_otto_spec_rejections(kwargs, field):
    with pytest.raises(InvalidSpec) as exc:
        OttoSpec(**kwargs)
    assert exc.value.field == field


def test_carnot_spec_rejections():
    with pytest.raises(InvalidSpec):
        CarnotSpec(T_H=0.3, T_L=0.6, B0=0.4, B1=0.8)
    with pytest.raises(InfeasibleGeometry) as exc:
        CarnotSpec(T_H=2.0, T_L=0.3, B0=0.4, B1=0.8)
    assert exc.value.field == "T_H"


def test_carnot_unit_cosine_is_feasible():
    spec = CarnotSpec(T_H=1 / math.atanh(0.8), T_L=0.3, B0=0.4, B1=0.8)
    assert spec.cosines[1] == pytest.approx(1.0)


def test_otto_efficiency_limits():
    a = otto_analytics(OttoSpec(theta1=math.pi / 6 + 1e-6, theta2=math.pi / 6, B0=0.4, B1=0.8))
    assert a.efficiency == pytest.approx(math.tan(math.pi / 6) * 1e-6, rel=1e-5)
    near = otto_analytics(OttoSpec(theta1=1.0, theta2=0.5, B0=0.4, B1=0.4 + 1e-9))
    assert 0 <= near.S_gen <= 1e-17
    assert 0 <= near.eta_carnot_bound - near.efficiency <= 1e-8


def test_carnot_near_degenerate():
    a = carnot_analytics(CarnotSpec(T_H=0.3, T_L=0.3 * (1 - 1e-9), B0=0.4, B1=0.8))
    assert 0 < a.efficiency <= 1.1e-9


def test_plan_structure(otto_bench, carnot_bench):
    plan = build_otto(otto_bench)
    assert [s.label for s in plan.strokes] == ["1->2", "2->3", "3->4", "4->1"]
    assert [s.mechanism for s in plan.strokes] == ["rotate", "contract", "rotate", "purify"]
    assert [s.role for s in plan.strokes] == [None, "hot", None, "cold"]
    assert build_otto(otto_bench, "spectral").strokes[3].mechanism == "spectral"
    assert plan.strokes[1].reservoir == pytest.approx(OTTO["T_H"])
    assert plan.strokes[3].reservoir == pytest.approx(OTTO["T_L"])
    cplan = build_carnot(carnot_bench)
    assert [s.reservoir for s in cplan.strokes] == [None, 0.6, None, 0.3]


def test_plan_must_chain(otto_bench):
    plan = build_otto(otto_bench)
    broken = list(plan.strokes)
    broken[2] = dataclasses.replace(broken[2], start=BlochState((0, 0, 0.5)))
    with pytest.raises(InvalidSpec):
        CyclePlan(plan.kind, plan.spec, tuple(broken))


def test_unknown_realization(otto_bench):
    with pytest.raises(InvalidSpec):
        build_otto(otto_bench, realization="magic")


def test_missing_reservoir(otto_bench):
    report = run_cycle(build_otto(otto_bench), 101)
    results = tuple(dataclasses.replace(r, stroke=dataclasses.replace(r.stroke, reservoir=None))
                    if r.stroke.label == "2->3" else r for r in report.strokes)
    bare = dataclasses.replace(report, strokes=results)
    with pytest.raises(MissingReservoir):
        entropy_production(bare, "analytic")


def test_report_closures(otto_bench):
    report = run_cycle(build_otto(otto_bench), 2001)
    assert abs(report.closure_dE) < 1e-12
    assert abs(report.closure_dS) < 1e-12
    assert abs(report.closure_QC) < 1e-8
    assert entropy_production(report, "analytic") == pytest.approx(OTTO["S_gen"], abs=1e-12)


def test_epsilon_scaling():
    base = otto_analytics(OttoSpec(theta1=1.0, theta2=0.4, B0=0.3, B1=0.7))
    scaled = otto_analytics(OttoSpec(theta1=1.0, theta2=0.4, B0=0.3, B1=0.7, epsilon=2.5))
    assert scaled.efficiency == pytest.approx(base.efficiency, rel=1e-15)
    assert scaled.Q_H == pytest.approx(2.5 * base.Q_H, rel=1e-14)
    assert scaled.T_L == pytest.approx(2.5 * base.T_L, rel=1e-14)


@given(otto_specs)
def test_otto_identities(spec):
    a = otto_analytics(spec)
    assert a.eta_carnot_bound >= a.efficiency
    assert a.S_gen >= 0
    assert abs(a.residual_sgen_identity) <= 1e-9
    assert abs(a.residual_alpha_identity) <= 1e-9
    assert a.C_net == pytest.approx(a.efficiency * a.Q_H, rel=1e-12)


@given(st.floats(0.05, 0.6), st.floats(0.05, 0.3), st.floats(0.01, 0.05))
def test_sgen_grows_with_rectangle(B0, dB, extra):
    small = otto_analytics(OttoSpec(theta1=1.0, theta2=0.5, B0=B0, B1=B0 + dB))
    large = otto_analytics(OttoSpec(theta1=1.0, theta2=0.5, B0=B0, B1=B0 + dB + extra))
    assert large.S_gen > small.S_gen


@settings(max_examples=15, deadline=None)
@given(otto_specs)
def test_simulated_otto_matches_analytic(spec):
    report = run_cycle(build_otto(spec), 1001)
    assert report.efficiency == pytest.approx(report.analytics.efficiency, rel=1e-6, abs=1e-9)
    assert report.S_gen == pytest.approx(report.analytics.S_gen, abs=1e-7)
