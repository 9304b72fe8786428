"""Command-line front end: ``otto``, ``carnot``, ``sweep`` and ``verify``.

Exit codes: 0 success, 1 infeasible geometry or failed verification,
2 usage error.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cycles import CarnotSpec, OttoSpec, build_carnot, build_otto, run_cycle
from .errors import BlochThermoError, InfeasibleGeometry, InvalidSpec
from .serialize import infeasible_row, render_json, render_output, summary_row

EXIT_OK, EXIT_FAILED = 0, 1  # usage errors exit 2 through argparse

# flag name -> (spec keyword, converter from CLI units, default)
OTTO_FLAGS = {
    "theta1-deg": ("theta1", math.radians, 60.0),
    "theta2-deg": ("theta2", math.radians, 30.0),
    "b0": ("B0", float, 0.4),
    "b1": ("B1", float, 0.8),
    "epsilon": ("epsilon", float, 1.0),
    "kb": ("k_B", float, 1.0),
}
CARNOT_FLAGS = {
    "th": ("T_H", float, 0.6),
    "tl": ("T_L", float, 0.3),
    "b0": ("B0", float, 0.4),
    "b1": ("B1", float, 0.8),
    "epsilon": ("epsilon", float, 1.0),
    "kb": ("k_B", float, 1.0),
}
CYCLE_FLAGS = {"otto": OTTO_FLAGS, "carnot": CARNOT_FLAGS}
SPEC_TYPES = {"otto": OttoSpec, "carnot": CarnotSpec}


@dataclass(frozen=True)
class SweepSpec:
    cycle: str
    parameter: str
    start: float
    stop: float
    count: int
    fixed: dict

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class Invocation:
    command: str
    cycle: str | None = None
    params: dict = field(default_factory=dict)
    samples: int = 10001
    out: Path | None = None
    format: str = "json"
    realization: str = "purify"
    sweep: SweepSpec | None = None


def _flag_for(cycle: str, spec_field: str | None) -> str:
    for flag, (name, _, _) in CYCLE_FLAGS[cycle].items():
        if name == spec_field:
            return "--" + flag
    return "--" + (spec_field or "?")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bloch-thermo", allow_abbrev=False,
                                     description="Qubit Otto/Carnot engines on the Bloch ball.")
    sub = parser.add_subparsers(dest="command", required=True)
    add = lambda name, help: sub.add_parser(name, help=help, allow_abbrev=False)  # noqa: E731

    def common(p):
        p.add_argument("--samples", type=int, default=10001, help="samples per stroke (default 10001)")
        p.add_argument("--out", type=Path, help="output directory for files")
        p.add_argument("--format", choices=("csv", "json"), default="json", help="stdout format")

    def params(p, flags):
        for flag, (name, conv, default) in flags.items():
            unit = " degrees" if conv is math.radians else ""
            p.add_argument("--" + flag, type=float, default=None, dest=flag.replace("-", "_"),
                           help=f"{name} (default {default:g}{unit})")

    otto = add("otto", "run one Otto cycle")
    params(otto, OTTO_FLAGS)
    otto.add_argument("--realization", choices=("purify", "spectral"), default="purify",
                      help="dissipator used for stroke 4->1")
    common(otto)
    carnot = add("carnot", "run one Carnot cycle")
    params(carnot, CARNOT_FLAGS)
    common(carnot)
    sweep = add("sweep", "run a cycle over a parameter grid")
    sweep.add_argument("--cycle", choices=("otto", "carnot"), required=True)
    sweep.add_argument("--vary", required=True, metavar="NAME=START:STOP:COUNT")
    params(sweep, dict(OTTO_FLAGS, **CARNOT_FLAGS))
    sweep.add_argument("--realization", choices=("purify", "spectral"), default="purify")
    common(sweep)
    verify = add("verify", "run the full invariant and acceptance suite")
    verify.add_argument("--out", type=Path, help="directory for verify.json")
    return parser


def _collect(ns, cycle: str, parser) -> dict:
    values = {}
    for flag, (name, conv, default) in CYCLE_FLAGS[cycle].items():
        raw = getattr(ns, flag.replace("-", "_"), None)
        if raw is not None and not math.isfinite(raw):
            parser.error(f"--{flag} must be finite")
        values[name] = conv(default if raw is None else raw)
    other = set(OTTO_FLAGS) | set(CARNOT_FLAGS)
    for flag in other - set(CYCLE_FLAGS[cycle]):
        if getattr(ns, flag.replace("-", "_"), None) is not None:
            parser.error(f"--{flag} does not apply to the {cycle} cycle")
    return values


def _validate(cycle: str, values: dict, parser) -> None:
    try:
        SPEC_TYPES[cycle](**values)
    except InfeasibleGeometry:
        pass  # reported at execution time with exit code 1
    except InvalidSpec as exc:
        parser.error(f"{_flag_for(cycle, exc.field)}: {exc}")


def _parse_vary(text: str, cycle: str, parser):
    try:
        name, rng = text.split("=", 1)
        start, stop, count = rng.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        parser.error(f"--vary expects NAME=START:STOP:COUNT, got {text!r}")
    if name not in CYCLE_FLAGS[cycle]:
        parser.error(f"--vary: unknown parameter {name!r} for {cycle}; "
                     f"choose from {', '.join(CYCLE_FLAGS[cycle])}")
    if count < 2:
        parser.error("--vary: COUNT must be at least 2")
    if not (math.isfinite(start) and math.isfinite(stop)):
        parser.error("--vary: range bounds must be finite")
    return name, start, stop, count


def parse_invocation(argv) -> Invocation:
    """Parse and validate ``argv``; invalid input exits with status 2 via argparse."""
    parser = _build_parser()
    ns = parser.parse_args(list(argv))
    if ns.command == "verify":
        return Invocation("verify", out=ns.out)
    if ns.samples < 2:
        parser.error("--samples must be at least 2")
    if ns.command in ("otto", "carnot"):
        values = _collect(ns, ns.command, parser)
        _validate(ns.command, values, parser)
        return Invocation(ns.command, ns.command, values, ns.samples, ns.out, ns.format,
                          getattr(ns, "realization", "purify"))
    name, start, stop, count = _parse_vary(ns.vary, ns.cycle, parser)
    fixed = _collect(ns, ns.cycle, parser)
    sweep = SweepSpec(ns.cycle, name, start, stop, count, fixed)
    return Invocation("sweep", ns.cycle, fixed, ns.samples, ns.out, ns.format, ns.realization, sweep)


def _plan(cycle: str, values: dict, realization: str):
    spec = SPEC_TYPES[cycle](**values)
    return build_otto(spec, realization) if cycle == "otto" else build_carnot(spec)


def _write(out: Path | None, name: str, data: bytes) -> None:
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_bytes(data)


def _emit(stdout, data: bytes) -> None:
    buf = getattr(stdout, "buffer", None)
    if buf is not None:
        stdout.flush()
        buf.write(data)
        buf.flush()
    else:
        stdout.write(data.decode("utf-8"))


def _run_single(inv: Invocation, stdout, stderr) -> int:
    try:
        plan = _plan(inv.cycle, inv.params, inv.realization)
        report = run_cycle(plan, inv.samples)
    except BlochThermoError as exc:
        print(f"infeasible: {exc}", file=stderr)
        return EXIT_FAILED
    summary = render_output(report, "json")
    _write(inv.out, "summary.json", summary)
    _write(inv.out, "trajectory.csv", render_output(report, "csv"))
    _emit(stdout, summary if inv.format == "json" else render_output([summary_row(report)], "csv"))
    return EXIT_OK


def sweep_rows(sweep: SweepSpec, samples: int, realization: str = "purify") -> list[dict]:
    name, conv, _ = CYCLE_FLAGS[sweep.cycle][sweep.parameter]
    rows = []
    for value in sweep.grid():
        values = dict(sweep.fixed, **{name: conv(float(value))})
        try:
            report = run_cycle(_plan(sweep.cycle, values, realization), samples)
        except BlochThermoError as exc:
            rows.append(infeasible_row(sweep.cycle, sweep.parameter, float(value), str(exc)))
            continue
        rows.append(summary_row(report, sweep.parameter, float(value)))
    return rows


def _run_sweep(inv: Invocation, stdout) -> int:
    rows = sweep_rows(inv.sweep, inv.samples, inv.realization)
    data = render_output(rows, inv.format)
    _write(inv.out, f"sweep.{inv.format}", data)
    _emit(stdout, data)
    return EXIT_OK


def _run_verify(inv: Invocation, stdout) -> int:
    from .verification import run_all

    results = run_all(lambda line: print(line, file=stdout, flush=True))
    ok = all(r.passed for r in results)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed", file=stdout)
    _write(inv.out, "verify.json", render_json([
        {"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]))
    return EXIT_OK if ok else EXIT_FAILED


def execute(inv: Invocation, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        if inv.command == "verify":
            return _run_verify(inv, stdout)
        if inv.command == "sweep":
            return _run_sweep(inv, stdout)
        return _run_single(inv, stdout, stderr)
    except OSError as exc:
        print(f"i/o error: {exc}", file=stderr)
        return EXIT_FAILED


def main(argv=None) -> int:
    inv = parse_invocation(sys.argv[1:] if argv is None else argv)
    return execute(inv)


if __name__ == "__main__":
    sys.exit(main())
