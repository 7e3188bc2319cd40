"""JSON and CSV serialization for solutions and path plans.

Floats go through ``repr`` in JSON (shortest round-tripping form) and
through ``%.17g`` in CSV, so export followed by import reproduces slab
data exactly.
"""

import csv
import io as _io
import json

from .constructions import ConnectorParams, PathPlan
from .errors import DomainError
from .flux_model import FluxModel, shock_cost_rate
from .front_tracker import Front, Slab, SpaceTimeSolution
from .profile import PiecewiseConstantProfile

_KINDS = ("entropic", "anti-entropic", "mixed")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# -- solutions ---------------------------------------------------------------


def solution_to_json(sol: SpaceTimeSolution) -> dict:
    slabs = []
    for slab in sol.slabs:
        slabs.append({
            "duration": slab.duration,
            "background": slab.background,
            "fronts": [
                {"start": f.start, "end": f.end, "speed": f.speed,
                 "left": f.left, "right": f.right, "kind": f.kind}
                for f in slab.fronts
            ],
        })
    return {"model": sol.model.to_json(), "slabs": slabs}


def solution_from_json(spec: dict) -> SpaceTimeSolution:
    if not isinstance(spec, dict) or "model" not in spec or "slabs" not in spec:
        raise DomainError("solution JSON needs 'model' and 'slabs'")
    model = FluxModel.from_json(spec["model"])
    slabs = []
    for s in spec["slabs"]:
        fronts = []
        for f in s.get("fronts", ()):
            kind = f["kind"]
            if kind not in _KINDS:
                raise DomainError(f"unknown front kind {kind!r}")
            fronts.append(Front(
                start=float(f["start"]), end=float(f["end"]),
                speed=float(f["speed"]), left=float(f["left"]),
                right=float(f["right"]), kind=kind))
        slabs.append(Slab(duration=float(s["duration"]),
                          fronts=tuple(fronts),
                          background=float(s["background"])))
    return SpaceTimeSolution(model=model, slabs=tuple(slabs))


def solution_to_csv(sol: SpaceTimeSolution) -> str:
    """One row per front per slab, with the per-front cost rate."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["slab", "t_start", "t_end", "x_start", "x_end",
                "speed", "left", "right", "kind", "rate"])
    times = sol.times
    rates: dict = {}
    for k, slab in enumerate(sol.slabs):
        for f in slab.fronts:
            key = (f.left, f.right)
            if key not in rates:
                rates[key] = shock_cost_rate(sol.model, f.left, f.right)
            w.writerow([k, _fmt(times[k]), _fmt(times[k + 1]),
                        _fmt(f.start), _fmt(f.end), _fmt(f.speed),
                        _fmt(f.left), _fmt(f.right), f.kind,
                        _fmt(rates[key])])
    return buf.getvalue()


# -- path plans ---------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, ConnectorParams):
        return obj.to_json()
    if isinstance(obj, PiecewiseConstantProfile):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    return float(obj)


def plan_to_json(plan: PathPlan, include_solutions: bool = True) -> dict:
    stages = []
    for st in plan.stages:
        entry = {
            "name": st.name,
            "duration": st.solution.duration,
            "slabs": len(st.solution.slabs),
            "h_total": st.cost.h_total,
            "jv_total": st.cost.jv_total,
            "signed_total": st.cost.signed_total,
            "info": _jsonable(st.info),
        }
        if include_solutions:
            entry["solution"] = solution_to_json(st.solution)
        stages.append(entry)
    return {
        "target_w": plan.target_w,
        "total_h": plan.total_h,
        "total_jv": plan.total_jv,
        "total_duration": plan.total_duration,
        "meta": _jsonable(plan.meta),
        "stages": stages,
    }


def plan_summary_csv(plan: PathPlan) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stage", "slabs", "duration", "h_total", "jv_total",
                "signed_total"])
    for st in plan.stages:
        w.writerow([st.name, len(st.solution.slabs),
                    _fmt(st.solution.duration), _fmt(st.cost.h_total),
                    _fmt(st.cost.jv_total), _fmt(st.cost.signed_total)])
    w.writerow(["total", sum(len(st.solution.slabs) for st in plan.stages),
                _fmt(plan.total_duration), _fmt(plan.total_h),
                _fmt(plan.total_jv),
                _fmt(sum(st.cost.signed_total for st in plan.stages))])
    return buf.getvalue()


def dump_json(obj: dict) -> str:
    """Stable, diff-friendly encoding shared by every artifact writer."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
