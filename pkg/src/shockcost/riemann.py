"""Riemann problem solvers used by the front tracker.

Three resolutions of a jump u_minus -> u_plus:

* ``tangency_point`` finds the farthest intermediate state U reachable from
  u_minus by a single zero-cost shock (the chord from u_minus touches the
  graph of f at U).
* ``split_riemann`` emits that entropic shock followed by an M-step ladder
  of small anti-entropic shocks covering the remaining gap; every speed is
  an exact secant slope and the fan speeds increase strictly.
* ``entropic_riemann`` emits the classical zero-cost fan: hull edges of the
  convex (or concave) envelope of f sampled on a value grid, so rarefactions
  appear as cascades of micro-shocks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonMonotoneSpeeds, WindowViolation
from .flux_model import ConvexityWindow, FluxModel, production_kernel, rankine_hugoniot

SPEED_TIE_TOL = 1e-13
TANGENCY_GRID = 512
TANGENCY_TOL = 1e-10


@dataclass(frozen=True)
class RiemannFan:
    """Resolution of one jump: waves (speed, right_value) ordered by
    strictly increasing speed, entered from left_value."""
    left_value: float
    waves: tuple[tuple[float, float], ...]

    @property
    def right_value(self) -> float:
        return self.waves[-1][1] if self.waves else self.left_value

    def values(self) -> list[float]:
        return [self.left_value] + [v for _, v in self.waves]

    def speeds(self) -> list[float]:
        return [s for s, _ in self.waves]


def _check_window(window: ConvexityWindow | None, *values: float) -> None:
    if window is None:
        return
    for v in values:
        if not window.contains(v, slack=1e-12):
            raise WindowViolation(
                f"trace {v} outside window [{window.lo}, {window.hi}]")


def _entropic_toward(model: FluxModel, u_minus: float, w: float,
                     grid: int) -> bool:
    """True when the single shock u_minus -> w produces no entropy."""
    if w == u_minus:
        return True
    lo, hi = min(u_minus, w), max(u_minus, w)
    vs = np.linspace(lo, hi, grid)
    rho = production_kernel(model, vs, w, u_minus)
    return float(np.max(rho)) <= model.rho_tol


def tangency_point(model: FluxModel, u_minus: float, u_plus: float,
                   window: ConvexityWindow | None = None,
                   grid: int = TANGENCY_GRID) -> float:
    """Farthest state U between the traces with rho(., U, u_minus) <= 0.

    Bisection on the fraction of the jump covered, refined to 1e-10; at U
    the chord from u_minus is tangent to the graph of f.  Returns u_plus
    when the whole jump is entropic and u_minus when no progress is
    admissible.
    """
    _check_window(window, u_minus, u_plus)
    if u_minus == u_plus:
        return u_minus
    if _entropic_toward(model, u_minus, u_plus, grid):
        return u_plus
    span = u_plus - u_minus
    lo_s, hi_s = 0.0, 1.0   # predicate holds at lo_s, fails at hi_s
    while abs(span) * (hi_s - lo_s) > TANGENCY_TOL:
        mid = 0.5 * (lo_s + hi_s)
        if _entropic_toward(model, u_minus, u_minus + mid * span, grid):
            lo_s = mid
        else:
            hi_s = mid
    return u_minus + lo_s * span


def _fuse_speed_ties(fronts: list[tuple[float, float, float]],
                     model: FluxModel) -> list[tuple[float, float, float]]:
    """Merge consecutive waves whose speeds agree within 1e-13.

    Equal secant speeds of adjacent waves imply the combined jump has the
    same secant, so fusing preserves the jump condition exactly.
    """
    out: list[tuple[float, float, float]] = []
    for front in fronts:
        if out and abs(front[0] - out[-1][0]) <= SPEED_TIE_TOL:
            left = out[-1][1]
            right = front[2]
            out[-1] = (rankine_hugoniot(model, left, right), left, right)
        else:
            out.append(front)
    return out


def split_riemann(model: FluxModel, u_minus: float, u_plus: float, M: int,
                  window: ConvexityWindow | None = None) -> RiemannFan:
    """Resolve a jump as one entropic shock plus M anti-entropic rungs.

    The entropic leg runs from u_minus to the tangency point U; the ladder
    covers [U, u_plus] in M equal steps, each a shock at its own secant
    speed, so each rung gap is at most |u_plus - U| / M.  Raises
    NonMonotoneSpeeds if the emitted speeds fail to increase strictly
    (after fusing exact ties).
    """
    if M < 1:
        raise ValueError("M must be a positive integer")
    _check_window(window, u_minus, u_plus)
    if u_minus == u_plus:
        return RiemannFan(u_minus, ())
    u_tan = tangency_point(model, u_minus, u_plus, window=window)
    fronts: list[tuple[float, float, float]] = []   # (speed, left, right)
    if u_tan != u_minus:
        fronts.append((rankine_hugoniot(model, u_minus, u_tan), u_minus, u_tan))
    if u_tan != u_plus:
        step = (u_plus - u_tan) / M
        prev = u_tan
        for k in range(1, M + 1):
            nxt = u_plus if k == M else u_tan + k * step
            if nxt == prev:
                continue
            fronts.append((rankine_hugoniot(model, prev, nxt), prev, nxt))
            prev = nxt
    fronts = _fuse_speed_ties(fronts, model)
    speeds = [s for s, _, _ in fronts]
    if any(b <= a for a, b in zip(speeds[:-1], speeds[1:])):
        raise NonMonotoneSpeeds(
            f"split fan speeds not increasing: {speeds}")
    return RiemannFan(u_minus, tuple((s, r) for s, _, r in fronts))


def _hull_indices(xs: np.ndarray, ys: np.ndarray, lower: bool) -> list[int]:
    """Monotone-chain hull of the graph points, lower or upper."""
    idx: list[int] = []
    sign = 1.0 if lower else -1.0
    for i in range(len(xs)):
        while len(idx) >= 2:
            i1, i2 = idx[-2], idx[-1]
            cross = ((xs[i2] - xs[i1]) * (ys[i] - ys[i1])
                     - (ys[i2] - ys[i1]) * (xs[i] - xs[i1]))
            if sign * cross <= 0.0:
                idx.pop()
            else:
                break
        idx.append(i)
    return idx


def entropic_riemann(model: FluxModel, u_minus: float, u_plus: float,
                     mesh: float) -> RiemannFan:
    """Zero-cost resolution of a jump via the flux envelope.

    The flux is sampled on the value grid of step <= mesh between the
    traces (for a piecewise-linear flux, on its own nodes); hull edges of
    the convex envelope (concave for decreasing jumps) become micro-shocks
    at exact secant speeds, ordered left to right by increasing speed.
    """
    if u_minus == u_plus:
        return RiemannFan(u_minus, ())
    lo, hi = min(u_minus, u_plus), max(u_minus, u_plus)
    if model.pwl_nodes is not None:
        inner = [x for x in model.pwl_nodes[0] if lo < x < hi]
        xs = np.asarray([lo] + inner + [hi])
    else:
        if mesh <= 0:
            raise ValueError("mesh must be positive")
        n = max(1, int(np.ceil((hi - lo) / mesh)))
        xs = np.linspace(lo, hi, n + 1)
    ys = np.asarray(model.f(xs), dtype=float)
    increasing = u_plus > u_minus
    hull = _hull_indices(xs, ys, lower=increasing)
    vals = [float(xs[i]) for i in hull]
    if not increasing:
        # traverse the upper hull from the high trace down to the low one
        vals = vals[::-1]
    fronts = []
    prev = vals[0]
    for nxt in vals[1:]:
        fronts.append((rankine_hugoniot(model, prev, nxt), prev, nxt))
        prev = nxt
    fronts = _fuse_speed_ties(fronts, model)
    speeds = [s for s, _, _ in fronts]
    if any(b <= a for a, b in zip(speeds[:-1], speeds[1:])):
        raise NonMonotoneSpeeds(f"envelope fan speeds not increasing: {speeds}")
    return RiemannFan(u_minus, tuple((s, r) for s, _, r in fronts))
