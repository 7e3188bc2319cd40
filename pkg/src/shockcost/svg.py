"""Deterministic SVG space-time diagrams of front-tracking solutions.

Fronts are straight segments in the (x, t) plane, x horizontal on [0, 1),
t vertical and increasing upward.  Lifted trajectories are split at every
integer crossing so each visible piece stays inside the periodic cell.
All coordinates are written with a fixed format, so identical solutions
produce byte-identical documents.
"""

import math

from .flux_model import ANTI_ENTROPIC, ENTROPIC, MIXED
from .front_tracker import SpaceTimeSolution

WIDTH = 800.0
HEIGHT = 560.0
MARGIN_L = 70.0
MARGIN_R = 24.0
MARGIN_T = 34.0
MARGIN_B = 50.0

COLORS = {
    ENTROPIC: "#1f77b4",
    ANTI_ENTROPIC: "#d62728",
    MIXED: "#7f7f7f",
}
LEGEND = (ENTROPIC, ANTI_ENTROPIC, MIXED)


def _num(x: float) -> str:
    return f"{x:.6f}"


def _tick(x: float) -> str:
    return f"{x:.6g}"


def unit_segments(xa: float, xb: float) -> list[tuple[float, float, float]]:
    """Split the lifted segment xa -> xb at integer crossings.

    Returns (s0, s1, n) parameter subintervals with the integer offset n
    such that x(s) - n lies in [0, 1] on each piece.
    """
    d = xb - xa
    if d == 0.0:
        return [(0.0, 1.0, float(math.floor(xa)))]
    lo, hi = (xa, xb) if d > 0.0 else (xb, xa)
    cuts = []
    k = math.floor(lo) + 1
    while k < hi:
        if k > lo:
            cuts.append(float(k))
        k += 1
    ss = [0.0] + sorted((c - xa) / d for c in cuts) + [1.0]
    out = []
    for s0, s1 in zip(ss[:-1], ss[1:]):
        if s1 <= s0:
            continue
        xm = xa + d * (0.5 * (s0 + s1))
        out.append((s0, s1, float(math.floor(xm))))
    return out


def solution_svg(sol: SpaceTimeSolution, title: str = "") -> str:
    times = sol.times
    T = times[-1]
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def px(x: float) -> float:
        return MARGIN_L + x * pw

    def py(t: float) -> float:
        return MARGIN_T + (1.0 - t / T) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(WIDTH)}" '
        f'height="{int(HEIGHT)}" viewBox="0 0 {int(WIDTH)} {int(HEIGHT)}">\n',
        f'<rect x="0" y="0" width="{int(WIDTH)}" height="{int(HEIGHT)}" '
        'fill="#ffffff"/>\n',
        f'<rect x="{_num(MARGIN_L)}" y="{_num(MARGIN_T)}" width="{_num(pw)}" '
        f'height="{_num(ph)}" fill="none" stroke="#000000" '
        'stroke-width="1"/>\n',
    ]

    font = 'font-family="Helvetica, Arial, sans-serif"'
    for i in range(5):
        xv = i / 4.0
        X = px(xv)
        parts.append(
            f'<line x1="{_num(X)}" y1="{_num(MARGIN_T + ph)}" '
            f'x2="{_num(X)}" y2="{_num(MARGIN_T + ph + 5.0)}" '
            'stroke="#000000" stroke-width="1"/>\n')
        parts.append(
            f'<text x="{_num(X)}" y="{_num(MARGIN_T + ph + 20.0)}" {font} '
            f'font-size="12" text-anchor="middle">{_tick(xv)}</text>\n')
        tv = T * i / 4.0
        Y = py(tv)
        parts.append(
            f'<line x1="{_num(MARGIN_L - 5.0)}" y1="{_num(Y)}" '
            f'x2="{_num(MARGIN_L)}" y2="{_num(Y)}" '
            'stroke="#000000" stroke-width="1"/>\n')
        parts.append(
            f'<text x="{_num(MARGIN_L - 9.0)}" y="{_num(Y + 4.0)}" {font} '
            f'font-size="12" text-anchor="end">{_tick(tv)}</text>\n')
    parts.append(
        f'<text x="{_num(MARGIN_L + 0.5 * pw)}" '
        f'y="{_num(HEIGHT - 12.0)}" {font} font-size="13" '
        'text-anchor="middle">x</text>\n')
    parts.append(
        f'<text x="{_num(16.0)}" y="{_num(MARGIN_T + 0.5 * ph)}" {font} '
        'font-size="13" text-anchor="middle">t</text>\n')
    if title:
        safe = (title.replace("&", "&amp;").replace("<", "&lt;")
                .replace(">", "&gt;"))
        parts.append(
            f'<text x="{_num(MARGIN_L)}" y="{_num(20.0)}" {font} '
            f'font-size="14">{safe}</text>\n')

    lx = WIDTH - MARGIN_R - 150.0
    for i, kind in enumerate(LEGEND):
        Y = 12.0 + 14.0 * i
        parts.append(
            f'<line x1="{_num(lx)}" y1="{_num(Y)}" x2="{_num(lx + 24.0)}" '
            f'y2="{_num(Y)}" stroke="{COLORS[kind]}" stroke-width="2"/>\n')
        parts.append(
            f'<text x="{_num(lx + 30.0)}" y="{_num(Y + 4.0)}" {font} '
            f'font-size="11">{kind}</text>\n')

    for k, slab in enumerate(sol.slabs):
        t0, t1 = times[k], times[k + 1]
        for f in slab.fronts:
            color = COLORS.get(f.kind, COLORS[MIXED])
            for s0, s1, n in unit_segments(f.start, f.end):
                xa = f.start + (f.end - f.start) * s0 - n
                xb = f.start + (f.end - f.start) * s1 - n
                ta = t0 + (t1 - t0) * s0
                tb = t0 + (t1 - t0) * s1
                parts.append(
                    f'<line x1="{_num(px(xa))}" y1="{_num(py(ta))}" '
                    f'x2="{_num(px(xb))}" y2="{_num(py(tb))}" '
                    f'stroke="{color}" stroke-width="1.2"/>\n')

    parts.append("</svg>\n")
    return "".join(parts)
