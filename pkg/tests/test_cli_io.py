import json
import os
import re

import pytest

from shockcost import (
    PiecewiseConstantProfile,
    cost_report,
    evolve,
    reverse,
    two_shock_absorber,
)
from shockcost.cli import main
from shockcost.front_tracker import HoldPolicy
from shockcost.io import (
    plan_summary_csv,
    plan_to_json,
    solution_from_json,
    solution_to_csv,
    solution_to_json,
)
from shockcost.svg import solution_svg

LINE = re.compile(
    r'<line x1="([-\d.]+)" y1="([-\d.]+)" x2="([-\d.]+)" y2="([-\d.]+)" '
    r'stroke="(#[0-9a-f]{6})" stroke-width="1.2"')


def _segments(doc):
    return [(float(m.group(1)), float(m.group(2)), float(m.group(3)),
             float(m.group(4)), m.group(5)) for m in LINE.finditer(doc)]


def _write(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh)
    return str(path)


# -- serialization -------------------------------------------------------------


def test_solution_json_round_trip_exact(cubic):
    _, sol, _ = two_shock_absorber(cubic, 0.0, 0.4, 0.2)
    spec = solution_to_json(sol)
    again = solution_from_json(spec)
    assert again.slabs == sol.slabs
    assert again.model.signature == sol.model.signature
    # byte-stable through an actual JSON text cycle
    text = json.dumps(spec)
    assert solution_from_json(json.loads(text)).slabs == sol.slabs


def test_solution_csv_shape(burgers):
    u = PiecewiseConstantProfile.of([0.0, 0.5], [0.0, 1.0])
    sol = evolve(burgers, u, 1.0, HoldPolicy())
    rows = solution_to_csv(sol).strip().split("\n")
    header = rows[0].split(",")
    assert header == ["slab", "t_start", "t_end", "x_start", "x_end",
                      "speed", "left", "right", "kind", "rate"]
    assert len(rows) == 1 + sum(len(s.fronts) for s in sol.slabs)
    # float fields round-trip
    first = rows[1].split(",")
    assert float(first[5]) == sol.slabs[0].fronts[0].speed


def test_plan_serialization(cubic):
    from shockcost import ConnectorParams, connector
    params = ConnectorParams(d1=0.2, d2=0.06, delta=0.018, M=6)
    u = PiecewiseConstantProfile.of([0.0, 0.5], [0.012, -0.012])
    plan = connector(cubic, 0.0, u, params)
    spec = plan_to_json(plan)
    assert [st["name"] for st in spec["stages"]] == ["glue", "absorber"]
    assert abs(spec["total_h"] - plan.total_h) == 0.0
    rebuilt = solution_from_json(spec["stages"][0]["solution"])
    assert rebuilt.slabs == plan.stages[0].solution.slabs
    table = plan_summary_csv(plan).strip().split("\n")
    assert table[0].startswith("stage,")
    assert len(table) == 2 + len(plan.stages)
    assert table[-1].startswith("total,")


# -- SVG geometry ---------------------------------------------------------------


def test_svg_axes_only_for_constant(cubic):
    sol = evolve(cubic, PiecewiseConstantProfile.constant(0.1), 1.0,
                 HoldPolicy())
    doc = solution_svg(sol)
    assert _segments(doc) == []
    assert "<svg" in doc and "</svg>" in doc


def test_svg_absorber_trajectories_meet(cubic):
    _, sol, tau = two_shock_absorber(cubic, 0.0, 0.4, 0.2, x0=0.5)
    doc = solution_svg(sol)
    segs = _segments(doc)
    assert len(segs) >= 3
    # topmost endpoints (t = tau) collapse to one torus point
    top = [s for s in segs if min(s[1], s[3]) <= 34.0 + 1e-6]
    assert len(top) == 3
    xs = [s[0] if s[1] < s[3] else s[2] for s in top]
    units = [(x - 70.0) / 706.0 for x in xs]
    for a in units:
        for b in units:
            d = abs(a - b) % 1.0
            assert min(d, 1.0 - d) <= 1e-5


def test_svg_reverse_is_mirror(cubic):
    u = PiecewiseConstantProfile.of([0.0, 0.3, 0.65], [0.25, -0.1, 0.05])
    sol = evolve(cubic, u, 0.8, HoldPolicy())
    fwd = _segments(solution_svg(sol))
    bwd = _segments(solution_svg(reverse(sol)))
    assert len(fwd) == len(bwd) > 0

    def canon(points):
        out = []
        for x1, y1, x2, y2 in points:
            a, b = (x1, y1), (x2, y2)
            if (b, a) < (a, b):
                a, b = b, a
            out.append((round(a[0], 3), round(a[1], 3),
                        round(b[0], 3), round(b[1], 3)))
        return sorted(out)

    mirrored = canon([(2 * 70.0 + 706.0 - x1, 2 * 34.0 + 476.0 - y1,
                       2 * 70.0 + 706.0 - x2, 2 * 34.0 + 476.0 - y2)
                      for x1, y1, x2, y2, _ in fwd])
    assert mirrored == canon([s[:4] for s in bwd])


# -- CLI ------------------------------------------------------------------------


def _scenario_evolve(tmp_path, name="run.json"):
    return _write(tmp_path / name, {
        "model": {"builtin": "burgers"},
        "initial": {"square_wave": {"center": 0.0, "amplitude": 0.3}},
        "T": 2.0, "mesh": 0.05,
    })


def test_cli_evolve_artifacts(tmp_path, capsys):
    scen = _scenario_evolve(tmp_path)
    out = tmp_path / "out"
    assert main(["evolve", "--scenario", scen, "--out", str(out)]) == 0
    for suffix in ("results.json", "trajectory.csv", "trajectory.svg",
                   "solution.json"):
        assert (out / f"run__{suffix}").is_file()
    res = json.loads((out / "run__results.json").read_text())
    assert res["command"] == "evolve"
    assert res["results"]["h_total"] == 0.0
    assert res["results"]["check"]["passed"] is True
    # the exported solution re-imports exactly
    sol = solution_from_json(
        json.loads((out / "run__solution.json").read_text()))
    assert sol.duration == 2.0


def test_cli_determinism(tmp_path):
    scen = _scenario_evolve(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["evolve", "--scenario", scen, "--out", str(a)]) == 0
    assert main(["evolve", "--scenario", scen, "--out", str(b)]) == 0
    for suffix in ("results.json", "trajectory.csv", "trajectory.svg",
                   "solution.json"):
        assert ((a / f"run__{suffix}").read_bytes()
                == (b / f"run__{suffix}").read_bytes())


def test_cli_cost_example(tmp_path):
    import shockcost
    burgers = shockcost.FluxModel.burgers()
    u = PiecewiseConstantProfile.of([0.0, 0.5], [0.0, 1.0])
    sol = evolve(burgers, u, 1.0, HoldPolicy())
    sol_path = _write(tmp_path / "shock.json", solution_to_json(sol))
    scen = _write(tmp_path / "cost.json", {"solution": "shock.json"})
    out = tmp_path / "out"
    assert main(["cost", "--scenario", scen, "--out", str(out)]) == 0
    res = json.loads((out / "cost__results.json").read_text())
    assert abs(res["results"]["h_total"] - 1.0 / 12.0) <= 1e-9
    assert (out / "cost__figure.png").stat().st_size > 0
    assert (out / "cost__trajectory.csv").is_file()
    del sol_path


def test_cli_reverse_round_trip(tmp_path, cubic):
    _, sol, _ = two_shock_absorber(cubic, 0.0, 0.4, 0.2)
    _write(tmp_path / "sol.json", solution_to_json(sol))
    scen = _write(tmp_path / "rev.json", {"solution": "sol.json"})
    out = tmp_path / "out"
    assert main(["reverse", "--scenario", scen, "--out", str(out)]) == 0
    rev = solution_from_json(
        json.loads((out / "rev__solution.json").read_text()))
    assert rev.slabs == reverse(sol).slabs


def test_cli_sweep_five_rows_and_slope(tmp_path):
    scen = _write(tmp_path / "sweep.json", {
        "model": {"builtin": "cubic"},
        "initial": {"square_wave": {"center": 0.0, "amplitude": 0.2}},
        "m": 0.0, "T_bar": 1.0,
        "M_values": [4, 8, 16, 32, 64],
    })
    out = tmp_path / "out"
    assert main(["sweep", "--scenario", scen, "--out", str(out),
                 "--jobs", "2"]) == 0
    rows = (out / "sweep__sweep.csv").read_text().strip().split("\n")
    assert len(rows) == 6
    assert rows[0].split(",")[0] == "M"
    slope = float(rows[1].split(",")[-1])
    assert -2.4 <= slope <= -1.6
    res = json.loads((out / "sweep__results.json").read_text())
    assert len(res["results"]["rows"]) == 5


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert main(["evolve", "--scenario", str(bad)]) == 2
    assert main(["evolve", "--scenario", str(tmp_path / "missing.json")]) == 2
    # declared command must match the invoked one
    scen = _write(tmp_path / "mismatch.json", {
        "command": "cost",
        "model": {"builtin": "burgers"},
        "initial": {"constant": 0.0}, "T": 1.0, "mesh": 0.1,
    })
    assert main(["evolve", "--scenario", scen]) == 2
    # unknown command is a usage error
    assert main(["transmogrify", "--scenario", str(bad)]) == 2
    # infeasible connector params: a numerical failure, not a scenario error
    scen3 = _write(tmp_path / "infeasible.json", {
        "model": {"builtin": "cubic"},
        "initial": {"constant": 0.0}, "m": 0.0,
        "params": {"d1": 0.9, "d2": 0.5, "delta": 0.1, "M": 4},
    })
    assert main(["connect", "--scenario", scen3,
                 "--out", str(tmp_path / "o3")]) == 3


def test_cli_quad_tol_env(tmp_path, monkeypatch):
    scen = _scenario_evolve(tmp_path)
    monkeypatch.setenv("SHOCKCOST_QUAD_TOL", "not-a-number")
    assert main(["evolve", "--scenario", scen,
                 "--out", str(tmp_path / "o1")]) == 2
    monkeypatch.setenv("SHOCKCOST_QUAD_TOL", "1e-8")
    assert main(["evolve", "--scenario", scen,
                 "--out", str(tmp_path / "o2")]) == 0


def test_cli_connect_plan_artifacts(tmp_path):
    scen = _write(tmp_path / "conn.json", {
        "model": {"builtin": "cubic"},
        "initial": {"breakpoints": [0.0, 0.5], "values": [0.012, -0.012]},
        "m": 0.0,
        "params": {"d1": 0.2, "d2": 0.06, "delta": 0.018, "M": 6},
    })
    out = tmp_path / "out"
    assert main(["connect", "--scenario", scen, "--out", str(out)]) == 0
    assert (out / "conn__plan.json").is_file()
    assert (out / "conn__summary.csv").is_file()
    assert (out / "conn__figure.png").stat().st_size > 0
    assert (out / "conn__stage00_glue.svg").is_file()
    assert (out / "conn__stage01_absorber.csv").is_file()
    res = json.loads((out / "conn__results.json").read_text())
    assert res["results"]["total_h"] > 0.0
    assert res["results"]["tau"] > 0.0
