"""One test per acceptance criterion; the run ends with a PASS/FAIL line for each."""
import io
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from bloch_thermo.bloch import BlochState, LocalField, bloch_to_matrix, entropy, matrix_to_bloch
from bloch_thermo.cli import execute, parse_invocation
from bloch_thermo.cycles import CarnotSpec, OttoSpec, build_carnot, build_otto, otto_analytics, run_cycle
from bloch_thermo.dynamics import (
    PurifyingDissipator,
    SigmaXDissipator,
    SpectralDissipator,
    UnitaryRotation,
    contract_isochoric,
    isothermal_path,
    oracle_integrate,
    purify_isochoric,
    rk4_affine,
    rotate_isentropic,
    spectral_isochoric,
    stack_operators,
)
from bloch_thermo.ledger import integrate_ledger

FIELD = LocalField.along_z(1.0)
OTTO = OttoSpec(theta1=math.radians(60), theta2=math.radians(30), B0=0.4, B1=0.8)
CARNOT = CarnotSpec(T_H=0.6, T_L=0.3, B0=0.4, B1=0.8)

# closed forms at the benchmarks, evaluated independently with mpmath at 40 digits
ETA_OTTO = 0.42264973081037424
OTTO_STROKES = {"1->2": ("C", -0.29282032302755092), "2->3": ("Q", 0.34641016151377546),
                "3->4": ("C", 0.14641016151377546), "4->1": ("Q", -0.2)}
CARNOT_Q23 = 0.17146879719806713
CARNOT_C23 = 0.25418935811616108
OTTO_SGEN = 0.26998534338980315


@pytest.fixture(scope="module")
def otto_report():
    t0 = time.perf_counter()
    report = run_cycle(build_otto(OTTO), 10001)
    return report, time.perf_counter() - t0


@pytest.fixture(scope="module")
def carnot_report():
    return run_cycle(build_carnot(CARNOT), 10001)


@pytest.mark.criterion(1, "Otto benchmark efficiency within 1e-6 relative, < 1 s")
def test_otto_efficiency(otto_report):
    report, seconds = otto_report
    assert report.analytics.efficiency == pytest.approx(ETA_OTTO, rel=1e-15)
    assert report.analytics.efficiency == pytest.approx(1 - math.cos(math.pi / 3) / math.cos(math.pi / 6))
    assert abs(report.efficiency - ETA_OTTO) / ETA_OTTO <= 1e-6
    assert seconds < 1.0


@pytest.mark.criterion(2, "Otto per-stroke ledgers within 1e-6")
def test_otto_strokes(otto_report):
    report, _ = otto_report
    for r in report.strokes:
        channel, expected = OTTO_STROKES[r.stroke.label]
        assert abs(getattr(r.ledger, channel) - expected) <= 1e-6
        other = "Q" if channel == "C" else "C"
        assert abs(getattr(r.ledger, other)) <= 1e-6


@pytest.mark.criterion(3, "Carnot benchmark efficiency 0.5 and isothermal ledger within 1e-6")
def test_carnot(carnot_report):
    report = carnot_report
    assert abs(report.analytics.efficiency - 0.5) <= 1e-6
    assert abs(report.efficiency - 0.5) <= 1e-6
    iso = {r.stroke.label: r.ledger for r in report.strokes}["2->3"]
    assert abs(iso.Q - CARNOT_Q23) <= 1e-6
    assert abs(iso.C - CARNOT_C23) <= 1e-6


@pytest.mark.criterion(4, "Entropy production: Otto 0.2699854 (1e-8 analytic, 1e-6 simulated), Carnot 0")
def test_entropy_production(otto_report, carnot_report):
    report, _ = otto_report
    assert abs(report.analytics.S_gen - OTTO_SGEN) <= 1e-8
    assert abs(report.S_gen - OTTO_SGEN) <= 1e-6
    assert abs(carnot_report.analytics.S_gen) <= 1e-8
    assert abs(carnot_report.S_gen) <= 1e-8


@pytest.mark.criterion(5, "Identity suite over 1000 random Otto specs, < 10 s")
def test_identity_suite():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    checked = 0
    while checked < 1000:
        t2, t1 = np.sort(rng.uniform(0, math.pi / 2, 2))
        B0, B1 = np.sort(rng.uniform(0, 1, 2))
        if not (t2 < t1 and 0 < B0 < B1 < 1):
            continue
        a = otto_analytics(OttoSpec(theta1=float(t1), theta2=float(t2), B0=float(B0), B1=float(B1)))
        assert a.eta_carnot_bound >= a.efficiency
        assert a.S_gen >= 0
        assert abs(a.efficiency - (a.eta_carnot_bound - a.T_L * a.S_gen / a.Q_H)) <= 1e-9
        assert abs(a.eta_carnot_bound - (1 - a.alpha * (1 - a.efficiency))) <= 1e-9
        checked += 1
    assert time.perf_counter() - t0 < 10.0


@pytest.mark.criterion(6, "First law to 1e-8 eps and Clausius to 1e-6 k_B on every benchmark stroke")
def test_first_law_and_clausius(otto_report, carnot_report):
    report, _ = otto_report
    for r in list(report.strokes) + list(carnot_report.strokes):
        led = r.ledger
        assert abs(led.dE - (led.Q + led.W + led.C)) <= 1e-8
        assert abs(led.clausius - led.dS) <= 1e-6


def _generators(kind, rng, n):
    out = []
    for _ in range(n):
        if kind == "rotation":
            out.append(UnitaryRotation(tuple(rng.normal(size=3)), float(rng.uniform(-2, 2))))
        elif kind == "sigma_x":
            out.append(SigmaXDissipator(float(rng.uniform(0.1, 2))))
        elif kind == "purifying":
            out.append(PurifyingDissipator(tuple(rng.normal(size=3)), float(rng.uniform(0.1, 2))))
        else:
            target = rng.normal(size=3)
            target *= rng.uniform(0, 1) / np.linalg.norm(target)
            out.append(SpectralDissipator(bloch_to_matrix(target), float(rng.uniform(0.1, 2))))
    return out


@pytest.mark.criterion(7, "Bloch vs density-matrix oracle to 1e-8 on 100 states per generator; order ratio in [12, 20]")
@pytest.mark.parametrize("kind", ["rotation", "sigma_x", "purifying", "spectral"])
def test_dual_representation(kind):
    rng = np.random.default_rng({"rotation": 1, "sigma_x": 2, "purifying": 3, "spectral": 4}[kind])
    gens = _generators(kind, rng, 100)
    phi = rng.uniform(-math.pi, math.pi, 100)
    B = rng.uniform(0.05, 1.0, 100)
    b0 = np.column_stack([np.zeros(100), B * np.sin(phi), B * np.cos(phi)])
    M = np.array([g.bloch_affine()[0] for g in gens])
    c = np.array([g.bloch_affine()[1] for g in gens])
    bloch = rk4_affine(M, c, b0, 1e-3, 1000)
    H, L = stack_operators(gens)
    rho = oracle_integrate(H, L, bloch_to_matrix(b0), 1e-3, 1000)
    assert 0.5 * np.max(np.linalg.norm(matrix_to_bloch(rho) - bloch, axis=-1)) <= 1e-8

    # order check at steps where truncation dominates round-off
    exact = np.array([g.propagate(b, [1.0])[0] for g, b in zip(gens[:5], b0[:5])])
    e1 = np.linalg.norm(rk4_affine(M[:5], c[:5], b0[:5], 0.1, 10)[-1] - exact, axis=-1)
    e2 = np.linalg.norm(rk4_affine(M[:5], c[:5], b0[:5], 0.05, 20)[-1] - exact, axis=-1)
    ratios = e1 / e2
    assert np.all((ratios >= 12) & (ratios <= 20)), ratios


def _angle_drift(traj):
    d0 = traj.b[0] / np.linalg.norm(traj.b[0])
    return np.max(np.arctan2(np.linalg.norm(np.cross(traj.b, d0), axis=1), traj.b @ d0))


@pytest.mark.criterion(8, "Isentropic S to 1e-12, radial drift <= 1e-9, both 4->1 realizations agree to 1e-8")
def test_structural_invariants():
    start = BlochState.from_polar(0.8, math.pi / 3)
    rot = rotate_isentropic(start, -math.pi / 6)
    S0 = entropy(start)
    assert max(abs(entropy(s) - S0) for s in rot.states()) <= 1e-12
    for traj in (contract_isochoric(start, 0.4), purify_isochoric(BlochState.from_polar(0.4, 1.0), 0.8),
                 spectral_isochoric(BlochState.from_polar(0.4, 1.0), 0.8)):
        assert _angle_drift(traj) <= 1e-9
    purify = run_cycle(build_otto(OTTO, "purify"), 10001).strokes[3].ledger
    spectral = run_cycle(build_otto(OTTO, "spectral"), 10001).strokes[3].ledger
    for name in ("Q", "W", "C", "dE", "dS"):
        assert abs(getattr(purify, name) - getattr(spectral, name)) <= 1e-8


@pytest.mark.criterion(9, "Linear vs quadratic isothermal schedule changes Q and C by <= 1e-6 eps")
def test_reparameterization():
    t2, t3 = CARNOT.thetas[1], CARNOT.thetas[2]
    lin = integrate_ledger(isothermal_path(0.6, t2, t3, FIELD, schedule="linear"), FIELD)
    quad = integrate_ledger(isothermal_path(0.6, t2, t3, FIELD, schedule="quadratic"), FIELD)
    assert abs(lin.Q - quad.Q) <= 1e-6
    assert abs(lin.C - quad.C) <= 1e-6


@pytest.mark.criterion(10, "Byte-identical CLI output; verify exits 0 in < 60 s")
def test_cli_determinism(tmp_path):
    for argv in (["otto"], ["carnot"], ["otto", "--format", "csv"],
                 ["sweep", "--cycle", "otto", "--vary", "b0=0.1:0.5:3", "--samples", "101"]):
        blobs = []
        for i in range(2):
            out_dir = tmp_path / f"{argv[0]}{len(argv)}_{i}"
            buf = io.StringIO()
            assert execute(parse_invocation(argv + ["--out", str(out_dir)]), buf, io.StringIO()) == 0
            files = {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}
            blobs.append((buf.getvalue(), files))
        assert blobs[0] == blobs[1]
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "bloch_thermo", "verify"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert time.perf_counter() - t0 < 60.0
    assert "FAIL" not in proc.stdout
