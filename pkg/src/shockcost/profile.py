"""Piecewise-constant profiles on the unit torus.

A profile is a cyclic list of breakpoints in [0, 1) with the value carried
on the arc starting at each breakpoint.  Normalized form: breakpoints
strictly increasing, cyclically adjacent values distinct, and a constant
profile stored as the single piece (0.0, value).
"""
from __future__ import annotations

import csv
import io
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError
from .flux_model import FluxModel, einstein_entropy

FUSE_TOL = 1e-14


@dataclass(frozen=True)
class PiecewiseConstantProfile:
    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    @classmethod
    def of(cls, breakpoints: Sequence[float], values: Sequence[float],
           normalize: bool = True) -> "PiecewiseConstantProfile":
        bps = [float(b) for b in breakpoints]
        vals = [float(v) for v in values]
        if len(bps) != len(vals) or not bps:
            raise DomainError("breakpoints and values must be nonempty and match")
        for b in bps:
            if not (0.0 <= b < 1.0):
                raise DomainError(f"breakpoint {b} outside [0, 1)")
        for v in vals:
            if not (-1.0 <= v <= 1.0):
                raise DomainError(f"value {v} outside [-1, 1]")
        if any(b2 <= b1 for b1, b2 in zip(bps[:-1], bps[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        p = cls(tuple(bps), tuple(vals))
        return p.normalized() if normalize else p

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstantProfile":
        return cls.of((0.0,), (value,))

    @classmethod
    def square_wave(cls, center: float, amplitude: float,
                    x0: float = 0.0, x1: float = 0.5) -> "PiecewiseConstantProfile":
        """center + amplitude on [x0, x1), center - amplitude elsewhere."""
        return cls.of((x0, x1), (center + amplitude, center - amplitude))

    # -- structure ----------------------------------------------------------

    def normalized(self) -> "PiecewiseConstantProfile":
        """Fuse pieces shorter than 1e-14 and cyclically equal neighbours."""
        bps, vals = list(self.breakpoints), list(self.values)
        # drop zero-length pieces (cyclic gap below the fuse tolerance)
        while len(bps) > 1:
            n = len(bps)
            gaps = [(bps[(i + 1) % n] - bps[i]) % 1.0 for i in range(n)]
            tiny = [i for i, g in enumerate(gaps) if g < FUSE_TOL]
            if not tiny:
                break
            i = tiny[0]
            del bps[i], vals[i]
        # fuse cyclically adjacent equal values
        while len(bps) > 1:
            n = len(bps)
            j = next((i for i in range(n) if vals[i] == vals[(i - 1) % n]), None)
            if j is None:
                break
            del bps[j], vals[j]
        if len(bps) == 1:
            return PiecewiseConstantProfile((0.0,), (vals[0],))
        return PiecewiseConstantProfile(tuple(bps), tuple(vals))

    @property
    def pieces(self) -> int:
        return len(self.breakpoints)

    def lengths(self) -> tuple[float, ...]:
        bps = self.breakpoints
        n = len(bps)
        if n == 1:
            return (1.0,)
        return tuple((bps[(i + 1) % n] - bps[i]) % 1.0 if i == n - 1
                     else bps[i + 1] - bps[i] for i in range(n))

    def value_at(self, x: float) -> float:
        x = x % 1.0
        i = bisect_right(self.breakpoints, x) - 1
        return self.values[i] if i >= 0 else self.values[-1]

    def sample(self, xs) -> np.ndarray:
        return np.asarray([self.value_at(float(x)) for x in np.atleast_1d(xs)])

    # -- functionals ---------------------------------------------------------

    def mean(self) -> float:
        return float(sum(l * v for l, v in zip(self.lengths(), self.values)))

    def sup_distance_to(self, c: float) -> float:
        return max(abs(v - c) for v in self.values)

    def parity(self) -> "PiecewiseConstantProfile":
        """Spatial reflection x -> -x on the torus."""
        n = len(self.breakpoints)
        if n == 1:
            return PiecewiseConstantProfile((0.0,), self.values)
        starts = [(-self.breakpoints[(k + 1) % n]) % 1.0 for k in range(n)]
        order = sorted(range(n), key=lambda k: starts[k])
        return PiecewiseConstantProfile.of(
            tuple(starts[k] for k in order),
            tuple(self.values[k] for k in order))

    def to_json(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "values": list(self.values)}

    @classmethod
    def from_json(cls, spec: dict) -> "PiecewiseConstantProfile":
        if "breakpoints" not in spec or "values" not in spec:
            raise DomainError("profile JSON needs 'breakpoints' and 'values'")
        return cls.of(spec["breakpoints"], spec["values"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x_left", "x_right", "value"])
        n = len(self.breakpoints)
        for i in range(n):
            right = self.breakpoints[(i + 1) % n] if n > 1 else self.breakpoints[0] + 1.0
            if n > 1 and i == n - 1:
                right = self.breakpoints[0] + 1.0
            w.writerow([format(self.breakpoints[i], ".17g"),
                        format(right, ".17g"),
                        format(self.values[i], ".17g")])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PiecewiseConstantProfile":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][:3] != ["x_left", "x_right", "value"]:
            raise DomainError("profile CSV must start with x_left,x_right,value")
        bps = [float(r[0]) for r in rows[1:] if r]
        vals = [float(r[2]) for r in rows[1:] if r]
        return cls.of(bps, vals)


def mean(p: PiecewiseConstantProfile) -> float:
    return p.mean()


def einstein_integral(p: PiecewiseConstantProfile, model: FluxModel,
                      m: float) -> float:
    """Integral over the torus of the Einstein entropy h_m(p(x)).

    Finite for profiles with values in [-1, 1]; zero exactly when p is the
    constant m.
    """
    ent = einstein_entropy(model, m)
    return float(sum(l * float(ent.h(v))
                     for l, v in zip(p.lengths(), p.values)))


def parity(p: PiecewiseConstantProfile) -> PiecewiseConstantProfile:
    return p.parity()


def _merged_grid(p: PiecewiseConstantProfile,
                 q: PiecewiseConstantProfile) -> list[float]:
    pts = sorted(set(p.breakpoints) | set(q.breakpoints))
    return pts


def distances(p: PiecewiseConstantProfile,
              q: PiecewiseConstantProfile) -> tuple[float, float]:
    """(L1, Linf) distance on the torus via an exact breakpoint merge."""
    grid = _merged_grid(p, q)
    n = len(grid)
    l1 = 0.0
    linf = 0.0
    for i in range(n):
        a = grid[i]
        b = grid[(i + 1) % n] if i < n - 1 else grid[0] + 1.0
        length = b - a
        if length <= 0.0:
            continue
        xm = (a + 0.5 * length) % 1.0
        d = abs(p.value_at(xm) - q.value_at(xm))
        l1 += d * length
        linf = max(linf, d)
    return l1, linf
