"""Event-driven tracking of piecewise-constant weak solutions on the torus.

A solution is a stack of time slabs.  Within a slab every front moves at its
constant jump speed; the slab ends when two fronts first meet.  Collisions
are resolved by a policy (entropic envelope fan, split fan, or plain hold)
applied to the outermost traces of each colliding cluster.

Positions are stored lifted (real numbers, unit period): each front keeps
its start and end position for the slab, so time-space reversal is exact,
slab durations are reversal-invariant, and piece lengths can be read off as
lifted differences even at instants where several fronts coincide.
"""
from __future__ import annotations

import logging
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    DomainError,
    EventBudgetExceeded,
    MismatchedInterface,
    StallError,
)
from .flux_model import ConvexityWindow, FluxModel, rankine_hugoniot
from .profile import FUSE_TOL, PiecewiseConstantProfile, distances
from .riemann import RiemannFan, entropic_riemann, split_riemann

log = logging.getLogger("shockcost.front_tracker")

EVENT_BUDGET_DEFAULT = 10 ** 6
GRAZING_TOL = 1e-13       # relative speeds below this never collide
EVENT_TIE_TOL = 1e-13     # collision times closer than this are simultaneous
CONTINUITY_TOL = 1e-12


# -- policies ---------------------------------------------------------------


@dataclass(frozen=True)
class EntropicPolicy:
    """Classical zero-cost resolution on a flux linearized at step mesh."""
    mesh: float

    def solve(self, model: FluxModel, left: float, right: float) -> RiemannFan:
        return entropic_riemann(model, left, right, self.mesh)


@dataclass(frozen=True)
class SplitPolicy:
    """One entropic shock plus an M-rung anti-entropic ladder per jump."""
    M: int
    window: ConvexityWindow

    def solve(self, model: FluxModel, left: float, right: float) -> RiemannFan:
        return split_riemann(model, left, right, self.M, self.window)


@dataclass(frozen=True)
class HoldPolicy:
    """Keep every jump as a single front at its own secant speed."""

    def solve(self, model: FluxModel, left: float, right: float) -> RiemannFan:
        if left == right:
            return RiemannFan(left, ())
        return RiemannFan(left, ((rankine_hugoniot(model, left, right), right),))


Policy = EntropicPolicy | SplitPolicy | HoldPolicy


# -- data structures --------------------------------------------------------


@dataclass(frozen=True)
class Front:
    """One moving jump inside a slab; positions are lifted coordinates."""
    start: float
    end: float
    speed: float
    left: float
    right: float
    kind: str


@dataclass(frozen=True)
class Slab:
    duration: float
    fronts: tuple[Front, ...]
    background: float

    def positions_at(self, dt: float) -> list[float]:
        if dt >= self.duration:
            return [f.end for f in self.fronts]
        return [f.start + f.speed * dt for f in self.fronts]


def _profile_from_lifted(positions: Sequence[float], rights: Sequence[float],
                         background: float) -> PiecewiseConstantProfile:
    """Profile carried by fronts at lifted positions (cyclic list order).

    Lengths are lifted differences, so a piece that has wound around to the
    full circle keeps length 1 even when all breakpoints coincide mod 1.
    """
    n = len(positions)
    if n == 0:
        return PiecewiseConstantProfile.constant(background)
    # collision endpoints coincide only up to roundoff of the lifted
    # magnitude, so the fuse width must scale with it
    scale = max(1.0, max(abs(p) for p in positions))
    tol = max(FUSE_TOL, 8.0 * math.ulp(scale))
    pieces = []
    for i in range(n):
        if i < n - 1:
            length = positions[i + 1] - positions[i]
        else:
            length = positions[0] + 1.0 - positions[-1]
        if length >= tol:
            pieces.append((positions[i] % 1.0, rights[i], length))
    if not pieces:
        return PiecewiseConstantProfile.constant(rights[-1])
    pieces.sort(key=lambda p: p[0])
    return PiecewiseConstantProfile.of(
        tuple(p[0] for p in pieces), tuple(p[1] for p in pieces))


@dataclass(frozen=True)
class SpaceTimeSolution:
    """Piecewise-constant weak solution assembled from time slabs."""
    model: FluxModel
    slabs: tuple[Slab, ...]

    def __post_init__(self):
        if not self.slabs:
            raise DomainError("a solution needs at least one slab")
        for slab in self.slabs:
            if not (slab.duration > 0.0):
                raise DomainError("slab durations must be positive")
            fronts = slab.fronts
            for i, f in enumerate(fronts):
                nxt = fronts[(i + 1) % len(fronts)]
                if f.right != nxt.left:
                    raise MismatchedInterface(
                        f"cyclic trace chain broken in slab: {f.right} vs {nxt.left}")
        for k in range(len(self.slabs) - 1):
            a = _slab_profile(self.slabs[k], at_end=True)
            b = _slab_profile(self.slabs[k + 1], at_end=False)
            l1, _ = distances(a, b)
            if l1 > CONTINUITY_TOL:
                raise MismatchedInterface(
                    f"profiles disagree across slab boundary {k}: L1={l1:.3e}")

    @property
    def times(self) -> tuple[float, ...]:
        out = [0.0]
        for slab in self.slabs:
            out.append(out[-1] + slab.duration)
        return tuple(out)

    @property
    def duration(self) -> float:
        return self.times[-1]

    def initial_profile(self) -> PiecewiseConstantProfile:
        return _slab_profile(self.slabs[0], at_end=False)

    def final_profile(self) -> PiecewiseConstantProfile:
        return _slab_profile(self.slabs[-1], at_end=True)

    def profile_at(self, t: float) -> PiecewiseConstantProfile:
        times = self.times
        if t < -1e-12 or t > times[-1] + 1e-12:
            raise DomainError(f"time {t} outside [0, {times[-1]}]")
        k = min(max(bisect_right(times, t) - 1, 0), len(self.slabs) - 1)
        slab = self.slabs[k]
        dt = min(t - times[k], slab.duration)
        return _profile_from_lifted(slab.positions_at(dt),
                                    [f.right for f in slab.fronts],
                                    slab.background)

    def front_count(self, kind: str | None = None) -> int:
        """Maximum concurrent front count over slabs, optionally by kind."""
        best = 0
        for slab in self.slabs:
            n = sum(1 for f in slab.fronts if kind is None or f.kind == kind)
            best = max(best, n)
        return best


def _slab_profile(slab: Slab, at_end: bool) -> PiecewiseConstantProfile:
    pos = [f.end if at_end else f.start for f in slab.fronts]
    return _profile_from_lifted(pos, [f.right for f in slab.fronts],
                                slab.background)


# -- cost reports -----------------------------------------------------------


@dataclass(frozen=True)
class SegmentCost:
    slab: int
    front: int
    duration: float
    left: float
    right: float
    speed: float
    kind: str
    rate: float
    production: float


@dataclass(frozen=True)
class CostReport:
    """Per-front cost ledger of a solution.

    h_total integrates the positive-part kernel cost; jv_total integrates
    the positive part of the entropy production (never above h_total);
    signed_total integrates the raw production and telescopes to the
    Einstein entropy difference between the end profiles.
    """
    h_total: float
    jv_total: float
    signed_total: float
    segments: tuple[SegmentCost, ...]

    def __post_init__(self):
        if self.jv_total > self.h_total + 1e-9:
            raise DomainError(
                f"production total {self.jv_total} exceeds kernel cost {self.h_total}")


def cost_report(sol: SpaceTimeSolution) -> CostReport:
    model = sol.model
    rows: list[SegmentCost] = []
    h_total = 0.0
    jv_total = 0.0
    signed_total = 0.0
    for k, slab in enumerate(sol.slabs):
        for j, f in enumerate(slab.fronts):
            props = model.front_props(f.left, f.right)
            rows.append(SegmentCost(
                slab=k, front=j, duration=slab.duration,
                left=f.left, right=f.right, speed=f.speed, kind=f.kind,
                rate=props.rate, production=props.production))
            h_total += slab.duration * props.rate
            jv_total += slab.duration * max(props.production, 0.0)
            signed_total += slab.duration * props.production
    return CostReport(h_total=h_total, jv_total=jv_total,
                      signed_total=signed_total, segments=tuple(rows))


# -- evolution --------------------------------------------------------------


def resolve_collision(model: FluxModel, policy: Policy,
                      outer_left: float, outer_right: float) -> RiemannFan:
    """Replacement fan for a cluster of colliding fronts."""
    return policy.solve(model, outer_left, outer_right)


class _WorkFront:
    __slots__ = ("pos", "speed", "left", "right", "kind")

    def __init__(self, pos, speed, left, right, kind):
        self.pos = pos
        self.speed = speed
        self.left = left
        self.right = right
        self.kind = kind


def _fan_to_workfronts(model: FluxModel, fan: RiemannFan,
                       pos: float) -> list[_WorkFront]:
    out = []
    left = fan.left_value
    for speed, right in fan.waves:
        kind = model.front_props(left, right).kind
        out.append(_WorkFront(pos, speed, left, right, kind))
        left = right
    return out


def evolve(model: FluxModel, p0: PiecewiseConstantProfile, T: float,
           policy: Policy,
           event_budget: int = EVENT_BUDGET_DEFAULT) -> SpaceTimeSolution:
    """Track fronts of the initial profile p0 over [0, T] under a policy.

    With an EntropicPolicy the flux is first linearized on the policy mesh
    (with the profile values as extra nodes), and the returned solution
    references that piecewise-linear model: it is an exact weak solution of
    the linearized conservation law, and every front is cost-free for it.
    Other policies keep the original model.
    """
    work_model = model
    if isinstance(policy, EntropicPolicy):
        nodes = set(p0.values) | {p0.mean()}
        work_model = model.linearize(policy.mesh, extra_nodes=sorted(nodes))
    p = p0.normalized()
    starts: list[tuple[float, float, float]] = []
    if p.pieces > 1:
        n0 = p.pieces
        for i in range(n0):
            fan = resolve_collision(work_model, policy,
                                    p.values[(i - 1) % n0], p.values[i])
            left = fan.left_value
            for _, right in fan.waves:
                starts.append((p.breakpoints[i], left, right))
                left = right
    return track(work_model, starts, T, policy, background=p.values[0],
                 event_budget=event_budget)


def track(model: FluxModel, starts: Sequence[tuple[float, float, float]],
          T: float, policy,
          background: float = 0.0,
          event_budget: int = EVENT_BUDGET_DEFAULT) -> SpaceTimeSolution:
    """Run the collision loop from explicit (position, left, right) fronts.

    Speeds come from the jump condition, so every produced front satisfies
    it exactly.  The fronts must be listed in cyclic spatial order with a
    consistent trace chain; coincident positions are allowed as long as the
    coincident fronts separate (fan order).
    """
    if not (T > 0.0):
        raise DomainError("tracking horizon T must be positive")
    fronts: list[_WorkFront] = []
    for pos, left, right in starts:
        if left == right:
            continue
        speed = rankine_hugoniot(model, left, right)
        kind = model.front_props(left, right).kind
        fronts.append(_WorkFront(pos, speed, left, right, kind))
    work_model = model
    created = len(fronts)
    slabs: list[Slab] = []
    t = 0.0
    events = 0

    def close_slab(dt: float, work: list[_WorkFront]) -> list[float]:
        ends = [f.pos + f.speed * dt for f in work]
        slabs.append(Slab(
            duration=dt,
            fronts=tuple(Front(start=f.pos, end=e, speed=f.speed,
                               left=f.left, right=f.right, kind=f.kind)
                         for f, e in zip(work, ends)),
            background=background))
        return ends

    while t < T:
        n = len(fronts)
        if n < 2:
            close_slab(T - t, fronts)
            break
        # earliest catch-up over adjacent pairs; edge i joins fronts i, i+1.
        # A non-positive gap with converging speeds is a collision happening
        # now (near-simultaneous events can leave coincident pairs behind,
        # since advancing lifted positions quantizes small gaps).
        best_dt = math.inf
        edge_dt = [math.inf] * n
        for i in range(n):
            j = (i + 1) % n
            gap = (fronts[0].pos + 1.0 - fronts[-1].pos) if j == 0 \
                else fronts[j].pos - fronts[i].pos
            rel = fronts[i].speed - fronts[j].speed
            if rel <= GRAZING_TOL:
                continue
            edge_dt[i] = gap / rel if gap > 0.0 else 0.0
            if edge_dt[i] < best_dt:
                best_dt = edge_dt[i]
        if not math.isfinite(best_dt) or (best_dt > 0.0
                                          and t + best_dt >= T):
            close_slab(T - t, fronts)
            break
        events += 1
        if events > event_budget:
            raise EventBudgetExceeded(
                f"exceeded {event_budget} collision events at t={t}")
        tie = EVENT_TIE_TOL * max(1.0, best_dt)
        colliding = [edge_dt[i] <= best_dt + tie for i in range(n)]
        if best_dt > 0.0:
            ends = close_slab(best_dt, fronts)
        else:
            # zero-duration event: resolve in place, no slab to emit
            ends = [f.pos for f in fronts]
        new_fronts: list[_WorkFront] = []
        if all(colliding):
            # gaps always sum to the full circle, so they cannot all vanish
            raise StallError("every adjacent pair collides at once")
        # walk maximal runs of colliding edges; a run of edges i..i+r-1
        # consumes fronts i..i+r and is replaced by one fan
        start = next(i for i in range(n) if not colliding[(i - 1) % n])
        k = 0
        while k < n:
            i = (start + k) % n
            if not colliding[i]:
                f = fronts[i]
                new_fronts.append(_WorkFront(ends[i] % 1.0, f.speed,
                                             f.left, f.right, f.kind))
                k += 1
                continue
            run = [i]
            while True:
                k += 1
                j = (start + k) % n
                run.append(j)
                if not colliding[j]:
                    k += 1
                    break
            outer_left = fronts[run[0]].left
            outer_right = fronts[run[-1]].right
            if outer_left == outer_right:
                if len(run) == n:
                    background = outer_left
                continue
            fan = resolve_collision(work_model, policy, outer_left, outer_right)
            emitted = _fan_to_workfronts(work_model, fan, ends[run[0]] % 1.0)
            created += len(emitted)
            new_fronts.extend(emitted)
        # rotate (never sort) so positions ascend: the run walk preserves the
        # cyclic trace chain, and coincident positions must keep fan order
        n2 = len(new_fronts)
        if n2 > 1:
            dmin, imin = 0.0, None
            for i in range(n2):
                d = new_fronts[(i + 1) % n2].pos - new_fronts[i].pos
                if d < dmin:
                    dmin, imin = d, i
            if imin is not None and imin != n2 - 1:
                k0 = imin + 1
                new_fronts = new_fronts[k0:] + new_fronts[:k0]
        fronts = new_fronts
        t += best_dt
    log.debug("track: %d events, %d fronts created, %d slabs",
              events, created, len(slabs))
    return SpaceTimeSolution(model=work_model, slabs=tuple(slabs))


# -- transforms -------------------------------------------------------------


def reverse(sol: SpaceTimeSolution) -> SpaceTimeSolution:
    """Time-space parity u(t, x) -> u(T - t, -x).

    Speeds are preserved (both flips negate them), traces swap sides, and
    the entropic/anti-entropic labels exchange.  Applying reverse twice
    returns a solution equal to the original, slab for slab.
    """
    model = sol.model
    new_slabs = []
    for slab in reversed(sol.slabs):
        new_fronts = []
        for f in reversed(slab.fronts):
            kind = model.front_props(f.right, f.left).kind
            new_fronts.append(Front(start=-f.end, end=-f.start, speed=f.speed,
                                    left=f.right, right=f.left, kind=kind))
        new_slabs.append(Slab(duration=slab.duration,
                              fronts=tuple(new_fronts),
                              background=slab.background))
    return SpaceTimeSolution(model=model, slabs=tuple(new_slabs))


def concat(a: SpaceTimeSolution, b: SpaceTimeSolution) -> SpaceTimeSolution:
    """Glue two solutions of the same model along matching profiles."""
    if a.model.signature != b.model.signature:
        raise MismatchedInterface("cannot concatenate solutions of different models")
    l1, _ = distances(a.final_profile(), b.initial_profile())
    if l1 > CONTINUITY_TOL:
        raise MismatchedInterface(
            f"end and start profiles differ by L1={l1:.3e}")
    return SpaceTimeSolution(model=a.model, slabs=a.slabs + b.slabs)


# -- verification -----------------------------------------------------------


@dataclass(frozen=True)
class WeakSolutionReport:
    max_rh_residual: float
    max_mean_drift: float
    max_interface_l1: float
    passed: bool


def check_weak_solution(sol: SpaceTimeSolution,
                        tol: float = 1e-10) -> WeakSolutionReport:
    """Exact jump-condition residual per front plus conservation checks."""
    model = sol.model
    max_res = 0.0
    for slab in sol.slabs:
        for f in slab.fronts:
            s = rankine_hugoniot(model, f.left, f.right)
            max_res = max(max_res, abs(f.speed - s))
    m0 = sol.initial_profile().mean()
    max_drift = 0.0
    max_l1 = 0.0
    for k, slab in enumerate(sol.slabs):
        end_prof = _slab_profile(slab, at_end=True)
        max_drift = max(max_drift, abs(end_prof.mean() - m0))
        if k + 1 < len(sol.slabs):
            l1, _ = distances(end_prof,
                              _slab_profile(sol.slabs[k + 1], at_end=False))
            max_l1 = max(max_l1, l1)
    passed = max_res <= tol and max_drift <= tol and max_l1 <= tol
    return WeakSolutionReport(max_rh_residual=max_res,
                              max_mean_drift=max_drift,
                              max_interface_l1=max_l1,
                              passed=passed)
