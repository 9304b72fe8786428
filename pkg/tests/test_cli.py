import io
import json
import math

import pytest

from bloch_thermo.cli import execute, main, parse_invocation
from bloch_thermo.serialize import (
    TRAJECTORY_COLUMNS,
    format_float,
    load_summary,
    render_json,
    validate_summary,
)


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = execute(parse_invocation(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("argv, needle", [
    (["otto", "--b0", "0.9", "--b1", "0.8"], "--b1"),
    (["otto", "--theta1-deg", "20", "--theta2-deg", "30"], "--theta2-deg"),
    (["otto", "--b1", "1.0"], "--b1"),
    (["otto", "--th", "3"], "--th"),
    (["carnot", "--tl", "0.7"], "--tl"),
    (["carnot", "--theta1-deg", "10"], "--theta1-deg"),
    (["otto", "--samples", "1"], "--samples"),
    (["otto", "--b0", "nan"], "--b0"),
    (["sweep", "--cycle", "otto", "--vary", "b9=0:1:3"], "--vary"),
    (["sweep", "--cycle", "otto", "--vary", "b0=0.1:0.3"], "--vary"),
    (["frobnicate"], "frobnicate"),
])
def test_usage_errors_exit_2(argv, needle, capsys):
    with pytest.raises(SystemExit) as exc:
        parse_invocation(argv)
    assert exc.value.code == 2
    assert needle in capsys.readouterr().err


def test_degrees_converted():
    inv = parse_invocation(["otto", "--theta1-deg", "60", "--theta2-deg", "30"])
    assert abs(inv.params["theta1"] - math.pi / 3) <= 1e-15
    assert abs(inv.params["theta2"] - math.pi / 6) <= 1e-15


def test_infeasible_carnot_exits_1():
    code, out, err = run(["carnot", "--th", "2.0", "--samples", "11"])
    assert code == 1 and out == "" and "infeasible" in err


def test_otto_json_to_stdout():
    code, out, _ = run(["otto", "--samples", "201"])
    data = json.loads(out)
    assert code == 0
    assert data["eta_otto_analytic"] == pytest.approx(0.42264973081037424, rel=1e-15)
    assert validate_summary(data) == []


def test_out_directory_files(tmp_path):
    code, _, _ = run(["carnot", "--samples", "101", "--out", str(tmp_path)])
    assert code == 0
    data = load_summary(tmp_path / "summary.json")
    assert data["cycle"] == "carnot"
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0].split(",") == list(TRAJECTORY_COLUMNS)
    assert len(lines) == 1 + 4 * 101


def test_byte_identical_runs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    outs = [run(["otto", "--samples", "301", "--out", str(d)])[1] for d in (a, b)]
    assert outs[0] == outs[1]
    for name in ("summary.json", "trajectory.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_json_round_trip_is_bit_exact(tmp_path):
    run(["otto", "--samples", "101", "--out", str(tmp_path)])
    raw = (tmp_path / "summary.json").read_bytes()
    assert render_json(json.loads(raw)) == raw


def test_tampered_summary_detected(tmp_path):
    run(["otto", "--samples", "101", "--out", str(tmp_path)])
    data = load_summary(tmp_path / "summary.json")
    data["analytic"]["efficiency"] = math.nextafter(data["analytic"]["efficiency"], 1.0)
    assert validate_summary(data) == ["analytic.efficiency"]


def test_sweep_flags_infeasible_rows(tmp_path):
    code, out, _ = run(["sweep", "--cycle", "carnot", "--vary", "th=0.4:1.4:3", "--samples", "51",
                        "--format", "csv", "--out", str(tmp_path)])
    assert code == 0
    rows = out.splitlines()
    assert len(rows) == 4
    assert [r.split(",")[3] for r in rows[1:]] == ["ok", "ok", "infeasible"]
    assert (tmp_path / "sweep.csv").read_text() == out


def test_otto_sweep_json():
    code, out, _ = run(["sweep", "--cycle", "otto", "--vary", "b1=0.5:0.9:3", "--samples", "51"])
    rows = json.loads(out)
    assert code == 0 and [r["status"] for r in rows] == ["ok"] * 3
    # efficiency does not depend on the radii
    assert len({round(r["eta_analytic"], 15) for r in rows}) == 1


def test_csv_summary_row():
    code, out, _ = run(["otto", "--format", "csv", "--samples", "51"])
    header, row = out.splitlines()
    assert code == 0 and dict(zip(header.split(","), row.split(",")))["status"] == "ok"


def test_main_entry_point(capsys):
    assert main(["otto", "--samples", "21"]) == 0
    assert json.loads(capsys.readouterr().out)["cycle"] == "otto"


@pytest.mark.parametrize("x, text", [(1.0, "1.0"), (0.1, "0.10000000000000001"), (1e-20, "9.9999999999999995e-21"),
                                     (float("nan"), "NaN"), (-2.0, "-2.0")])
def test_format_float(x, text):
    assert format_float(x) == text
