"""Scenario-driven command line front end.

``shockcost <command> --scenario file.json [--out dir] [--jobs N] [--svg]``

Every run writes ``<stem>__results.json``.  Commands that produce a
solution also write its trajectory CSV, space-time SVG diagram, and a
solution JSON export; plan commands add a stage-summary CSV and a PNG
report figure.  ``--svg`` turns on per-run diagrams inside ``sweep``,
which otherwise only writes the sweep table.  Exit codes: 0 success,
2 scenario validation failure, 3 numerical failure.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .constructions import (ConnectorParams, PathPlan, connector,
                            quasipotential_path, split_evolution,
                            two_shock_absorber)
from .errors import ScenarioError, ShockCostError
from .flux_model import ANTI_ENTROPIC, FluxModel
from .front_tracker import (EntropicPolicy, SpaceTimeSolution,
                            check_weak_solution, cost_report, evolve, reverse)
from .io import (dump_json, plan_summary_csv, plan_to_json,
                 solution_from_json, solution_to_csv, solution_to_json)
from .profile import PiecewiseConstantProfile
from .svg import solution_svg

COMMANDS = ("evolve", "split-evolve", "absorber", "connect",
            "quasipotential", "cost", "reverse", "sweep")


class _Ctx:
    def __init__(self, out_dir: str, stem: str, svg_on: bool):
        self.out_dir = out_dir
        self.stem = stem
        self.svg_on = svg_on
        self.artifacts: list[str] = []

    def path(self, suffix: str) -> str:
        return os.path.join(self.out_dir, f"{self.stem}__{suffix}")

    def write(self, suffix: str, text: str) -> str:
        p = self.path(suffix)
        with open(p, "w", newline="") as fh:
            fh.write(text)
        self.artifacts.append(p)
        return p

    def solution_artifacts(self, tag: str, sol: SpaceTimeSolution,
                           title: str = "") -> None:
        self.write(f"{tag}.csv", solution_to_csv(sol))
        self.write(f"{tag}.svg", solution_svg(sol, title=title))


# -- scenario parsing ---------------------------------------------------------


def _load_scenario(path: str) -> dict:
    if not os.path.isfile(path):
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot parse scenario {path}: {exc}") from exc
    if not isinstance(spec, dict):
        raise ScenarioError("scenario must be a JSON object")
    return spec


def _quad_tol_override(sc: dict) -> float | None:
    env = os.environ.get("SHOCKCOST_QUAD_TOL")
    raw = env if env is not None else sc.get("quad_tol")
    if raw is None:
        return None
    try:
        tol = float(raw)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad quad_tol {raw!r}") from exc
    if not (tol > 0.0):
        raise ScenarioError("quad_tol must be positive")
    return tol


def _build_model(sc: dict, quad_tol: float | None) -> FluxModel:
    spec = sc.get("model")
    if spec is None:
        raise ScenarioError("scenario needs a 'model' object")
    mspec = dict(spec) if isinstance(spec, dict) else spec
    if quad_tol is not None and isinstance(mspec, dict):
        mspec["quad_tol"] = quad_tol
    try:
        return FluxModel.from_json(mspec)
    except ShockCostError as exc:
        raise ScenarioError(f"bad model spec: {exc}") from exc


def _profile(sc: dict, key: str) -> PiecewiseConstantProfile:
    spec = sc.get(key)
    if spec is None:
        raise ScenarioError(f"scenario needs a {key!r} profile")
    try:
        if isinstance(spec, dict) and "constant" in spec:
            return PiecewiseConstantProfile.constant(float(spec["constant"]))
        if isinstance(spec, dict) and "square_wave" in spec:
            sw = spec["square_wave"]
            return PiecewiseConstantProfile.square_wave(
                float(sw.get("center", 0.0)), float(sw["amplitude"]),
                float(sw.get("x0", 0.0)), float(sw.get("x1", 0.5)))
        if isinstance(spec, dict):
            return PiecewiseConstantProfile.from_json(spec)
    except (ShockCostError, KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad {key!r} profile: {exc}") from exc
    raise ScenarioError(f"{key!r} must be a profile object")


def _number(sc: dict, key: str, default=None, positive: bool = False) -> float:
    raw = sc.get(key, default)
    if raw is None:
        raise ScenarioError(f"scenario needs a numeric {key!r}")
    try:
        value = float(raw)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad {key!r}: {raw!r}") from exc
    if positive and not (value > 0.0):
        raise ScenarioError(f"{key!r} must be positive")
    return value


def _load_solution(sc: dict, scenario_path: str) -> SpaceTimeSolution:
    spec = sc.get("solution")
    if spec is None:
        raise ScenarioError("scenario needs a 'solution' (path or object)")
    if isinstance(spec, str):
        path = spec
        if not os.path.isabs(path):
            path = os.path.join(os.path.dirname(os.path.abspath(scenario_path)),
                                path)
        if not os.path.isfile(path):
            raise ScenarioError(f"solution file not found: {path}")
        try:
            with open(path) as fh:
                spec = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ScenarioError(f"cannot parse solution {path}: {exc}") from exc
    try:
        return solution_from_json(spec)
    except ShockCostError as exc:
        raise ScenarioError(f"bad solution data: {exc}") from exc


def _check_fields(sol: SpaceTimeSolution) -> dict:
    chk = check_weak_solution(sol)
    return {"max_rh_residual": chk.max_rh_residual,
            "max_mean_drift": chk.max_mean_drift,
            "max_interface_l1": chk.max_interface_l1,
            "passed": chk.passed}


def _plan_artifacts(ctx: _Ctx, plan: PathPlan, title: str) -> dict:
    ctx.write("plan.json", dump_json(plan_to_json(plan)))
    ctx.write("summary.csv", plan_summary_csv(plan))
    for i, st in enumerate(plan.stages):
        ctx.solution_artifacts(f"stage{i:02d}_{st.name}", st.solution,
                               title=st.name)
    from .figures import plan_figure
    png = ctx.path("figure.png")
    plan_figure(plan, png, title=title)
    ctx.artifacts.append(png)
    return {
        "target_w": plan.target_w,
        "total_h": plan.total_h,
        "total_jv": plan.total_jv,
        "total_duration": plan.total_duration,
        "stages": [{"name": st.name, "duration": st.solution.duration,
                    "h_total": st.cost.h_total, "slabs": len(st.solution.slabs)}
                   for st in plan.stages],
    }


# -- command handlers ---------------------------------------------------------


def _cmd_evolve(sc, model, ctx, args):
    p0 = _profile(sc, "initial")
    T = _number(sc, "T", positive=True)
    mesh = _number(sc, "mesh", positive=True)
    sol = evolve(model, p0, T, EntropicPolicy(mesh))
    rep = cost_report(sol)
    ctx.solution_artifacts("trajectory", sol, title=f"evolve T={T:.6g}")
    ctx.write("solution.json", dump_json(solution_to_json(sol)))
    return {"h_total": rep.h_total, "jv_total": rep.jv_total,
            "duration": sol.duration, "front_count": sol.front_count(),
            "final": sol.final_profile().to_json(),
            "check": _check_fields(sol)}


def _cmd_split_evolve(sc, model, ctx, args):
    p0 = _profile(sc, "initial")
    m = _number(sc, "m", default=0.0)
    T_bar = _number(sc, "T_bar", positive=True)
    M = int(_number(sc, "M", positive=True))
    sol, rep = split_evolution(model, m, p0, T_bar, M)
    ctx.solution_artifacts("trajectory", sol, title=f"split M={M}")
    ctx.write("solution.json", dump_json(solution_to_json(sol)))
    return {"h_total": rep.h_total, "jv_total": rep.jv_total,
            "duration": sol.duration,
            "anti_front_max": sol.front_count(ANTI_ENTROPIC),
            "final": sol.final_profile().to_json(),
            "check": _check_fields(sol)}


def _cmd_absorber(sc, model, ctx, args):
    m = _number(sc, "m", default=0.0)
    d1 = _number(sc, "d1", positive=True)
    d2 = _number(sc, "d2", positive=True)
    x0 = _number(sc, "x0", default=0.5)
    profile, sol, tau = two_shock_absorber(model, m, d1, d2, x0)
    rep = cost_report(sol)
    ctx.solution_artifacts("trajectory", sol, title=f"absorber tau={tau:.6g}")
    ctx.write("solution.json", dump_json(solution_to_json(sol)))
    return {"tau": tau, "h_total": rep.h_total, "jv_total": rep.jv_total,
            "initial": profile.to_json(), "final": sol.final_profile().to_json(),
            "check": _check_fields(sol)}


def _cmd_connect(sc, model, ctx, args):
    u_i = _profile(sc, "initial")
    m = _number(sc, "m", default=0.0)
    pspec = sc.get("params")
    if not isinstance(pspec, dict):
        raise ScenarioError("connect needs a 'params' object")
    try:
        params = ConnectorParams.from_json(pspec)
        params.validate()
    except ShockCostError as exc:
        raise ScenarioError(f"bad connector params: {exc}") from exc
    plan = connector(model, m, u_i, params)
    out = _plan_artifacts(ctx, plan, title="connector")
    out["T"] = plan.meta.get("T")
    out["tau"] = plan.meta.get("tau")
    out["x0"] = plan.meta.get("x0")
    return out


def _cmd_quasipotential(sc, model, ctx, args):
    u_f = _profile(sc, "target")
    mesh = _number(sc, "mesh", default=0.01, positive=True)
    pspec = sc.get("params", "auto")
    if pspec == "auto":
        params = "auto"
    elif isinstance(pspec, dict):
        try:
            params = ConnectorParams.from_json(pspec)
            params.validate()
        except ShockCostError as exc:
            raise ScenarioError(f"bad connector params: {exc}") from exc
    else:
        raise ScenarioError("'params' must be \"auto\" or an object")
    plan = quasipotential_path(model, u_f, params, mesh)
    out = _plan_artifacts(ctx, plan, title="quasi-potential path")
    out["relax_cost"] = plan.total_h - plan.target_w
    return out


def _cmd_cost(sc, model, ctx, args):
    sol = _load_solution(sc, args.scenario)
    rep = cost_report(sol)
    ctx.solution_artifacts("trajectory", sol, title="priced solution")
    from .figures import solution_figure
    png = ctx.path("figure.png")
    solution_figure(sol, png, title="priced solution")
    ctx.artifacts.append(png)
    kinds = {k: sol.front_count(k)
             for k in ("entropic", "anti-entropic", "mixed")}
    return {"h_total": rep.h_total, "jv_total": rep.jv_total,
            "signed_total": rep.signed_total, "duration": sol.duration,
            "segments": len(rep.segments), "front_count": kinds,
            "check": _check_fields(sol)}


def _cmd_reverse(sc, model, ctx, args):
    sol = _load_solution(sc, args.scenario)
    rev = reverse(sol)
    fwd_rep = cost_report(sol)
    rev_rep = cost_report(rev)
    ctx.solution_artifacts("trajectory", rev, title="reversed solution")
    ctx.write("solution.json", dump_json(solution_to_json(rev)))
    return {"h_total": rev_rep.h_total, "jv_total": rev_rep.jv_total,
            "forward_h_total": fwd_rep.h_total, "duration": rev.duration,
            "final": rev.final_profile().to_json(),
            "check": _check_fields(rev)}


def _sweep_run(payload: tuple) -> dict:
    (mspec, m, bps, vals, T_bar, M, out_dir, stem, emit) = payload
    model = FluxModel.from_json(mspec)
    u = PiecewiseConstantProfile.of(bps, vals)
    sol, rep = split_evolution(model, m, u, T_bar, M)
    if emit:
        base = os.path.join(out_dir, f"{stem}__M{M:03d}")
        with open(base + "_trajectory.csv", "w", newline="") as fh:
            fh.write(solution_to_csv(sol))
        with open(base + "_diagram.svg", "w", newline="") as fh:
            fh.write(solution_svg(sol, title=f"split M={M}"))
    return {"M": M, "h_total": rep.h_total, "jv_total": rep.jv_total,
            "anti_front_max": sol.front_count(ANTI_ENTROPIC),
            "duration": sol.duration}


def _cmd_sweep(sc, model, ctx, args):
    u_i = _profile(sc, "initial")
    m = _number(sc, "m", default=0.0)
    T_bar = _number(sc, "T_bar", positive=True)
    raw = sc.get("M_values", [4, 8, 16, 32, 64])
    try:
        Ms = sorted(int(v) for v in raw)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad 'M_values': {raw!r}") from exc
    if not Ms or any(v < 1 for v in Ms):
        raise ScenarioError("'M_values' must be positive integers")
    mspec = model.to_json()
    payloads = [(mspec, m, list(u_i.breakpoints), list(u_i.values),
                 T_bar, M, ctx.out_dir, ctx.stem, ctx.svg_on) for M in Ms]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_run, payloads))
    else:
        rows = [_sweep_run(p) for p in payloads]
    rows.sort(key=lambda r: r["M"])
    slope = None
    if len(rows) >= 2 and all(r["h_total"] > 0.0 for r in rows):
        slope = float(np.polyfit(np.log([r["M"] for r in rows]),
                                 np.log([r["h_total"] for r in rows]), 1)[0])
    lines = ["M,h_total,jv_total,anti_front_max,duration,fitted_slope"]
    stxt = "" if slope is None else format(slope, ".17g")
    for r in rows:
        lines.append(",".join([
            str(r["M"]), format(r["h_total"], ".17g"),
            format(r["jv_total"], ".17g"), str(r["anti_front_max"]),
            format(r["duration"], ".17g"), stxt]))
    ctx.write("sweep.csv", "\n".join(lines) + "\n")
    if ctx.svg_on:
        for M in Ms:
            base = os.path.join(ctx.out_dir, f"{ctx.stem}__M{M:03d}")
            ctx.artifacts.extend([base + "_trajectory.csv",
                                  base + "_diagram.svg"])
    return {"rows": rows, "fitted_slope": slope}


_HANDLERS = {
    "evolve": _cmd_evolve,
    "split-evolve": _cmd_split_evolve,
    "absorber": _cmd_absorber,
    "connect": _cmd_connect,
    "quasipotential": _cmd_quasipotential,
    "cost": _cmd_cost,
    "reverse": _cmd_reverse,
    "sweep": _cmd_sweep,
}
_NO_MODEL = ("cost", "reverse")


def _run(args) -> int:
    sc = _load_scenario(args.scenario)
    declared = sc.get("command")
    if declared is not None and declared != args.command:
        raise ScenarioError(
            f"scenario declares command {declared!r}, invoked as "
            f"{args.command!r}")
    out_dir = args.out or os.path.dirname(os.path.abspath(args.scenario))
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.scenario))[0]
    ctx = _Ctx(out_dir, stem, args.svg)

    quad_tol = _quad_tol_override(sc)
    model = None
    if args.command not in _NO_MODEL:
        model = _build_model(sc, quad_tol)

    results = _HANDLERS[args.command](sc, model, ctx, args)
    payload = {"command": args.command, "scenario": os.path.basename(
        args.scenario), "results": results}
    if model is not None:
        payload["model"] = model.to_json()
    res_path = ctx.path("results.json")
    with open(res_path, "w", newline="") as fh:
        fh.write(dump_json(payload))
    for p in ctx.artifacts + [res_path]:
        print(f"wrote {p}")
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="shockcost",
        description="Construct and price piecewise-constant weak solutions "
                    "of scalar conservation laws on the torus.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True,
                       help="scenario JSON file")
        p.add_argument("--out", default=None,
                       help="output directory (default: scenario directory)")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker processes for sweep")
        p.add_argument("--svg", action="store_true",
                       help="emit per-run SVG diagrams inside sweep")
    return ap


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 2
        return 0 if code == 0 else 2
    if args.jobs < 1:
        print("shockcost: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return _run(args)
    except ScenarioError as exc:
        print(f"shockcost: scenario error: {exc}", file=sys.stderr)
        return 2
    except ShockCostError as exc:
        print(f"shockcost: computation failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
