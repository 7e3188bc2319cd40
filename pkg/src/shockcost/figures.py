"""Matplotlib renderings of solutions and path plans (PNG report figures)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection
from matplotlib.lines import Line2D

from .constructions import PathPlan
from .flux_model import ANTI_ENTROPIC, ENTROPIC, MIXED
from .front_tracker import SpaceTimeSolution
from .profile import PiecewiseConstantProfile
from .svg import COLORS, unit_segments


def _diagram(ax, sol: SpaceTimeSolution) -> None:
    times = sol.times
    segs: dict[str, list] = {ENTROPIC: [], ANTI_ENTROPIC: [], MIXED: []}
    for k, slab in enumerate(sol.slabs):
        t0, t1 = times[k], times[k + 1]
        for f in slab.fronts:
            bucket = segs.get(f.kind, segs[MIXED])
            for s0, s1, n in unit_segments(f.start, f.end):
                xa = f.start + (f.end - f.start) * s0 - n
                xb = f.start + (f.end - f.start) * s1 - n
                bucket.append([(xa, t0 + (t1 - t0) * s0),
                               (xb, t0 + (t1 - t0) * s1)])
    for kind, rows in segs.items():
        if rows:
            ax.add_collection(
                LineCollection(rows, colors=COLORS[kind], linewidths=1.0))
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, times[-1])
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    handles = [Line2D([], [], color=COLORS[k], label=k)
               for k in (ENTROPIC, ANTI_ENTROPIC, MIXED)]
    ax.legend(handles=handles, loc="upper right", fontsize=8)


def _steps(ax, p: PiecewiseConstantProfile, label: str, color: str) -> None:
    grid = np.linspace(0.0, 1.0, 513)
    ax.step(grid, p.sample(grid), where="post", label=label, color=color)


def solution_figure(sol: SpaceTimeSolution, path: str, title: str = "") -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
    _diagram(ax1, sol)
    if title:
        ax1.set_title(title)
    _steps(ax2, sol.initial_profile(), "t = 0", "#1f77b4")
    _steps(ax2, sol.final_profile(), f"t = {sol.duration:.6g}", "#d62728")
    ax2.set_xlabel("x")
    ax2.set_ylabel("u")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plan_figure(plan: PathPlan, path: str, title: str = "") -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
    names = [st.name for st in plan.stages]
    costs = [st.cost.h_total for st in plan.stages]
    ax1.bar(range(len(names)), costs, color="#1f77b4")
    ax1.set_xticks(range(len(names)))
    ax1.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax1.set_ylabel("stage cost H")
    if title:
        ax1.set_title(title)
    _steps(ax2, plan.initial_profile(), "path start", "#1f77b4")
    _steps(ax2, plan.final_profile(), "path end", "#d62728")
    ax2.set_xlabel("x")
    ax2.set_ylabel("u")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
