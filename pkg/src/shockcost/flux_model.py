"""Flux models and the pointwise cost kernels of jump discontinuities.

A model bundles a flux f with a diffusion D and a mobility sigma on the
state interval [-1, 1].  The central object is the production kernel of a
jump with left trace ``u_minus`` and right trace ``u_plus``:

    rho(v) = f(u_minus) (u_plus - v) + f(u_plus) (v - u_minus)
             - f(v) (u_plus - u_minus)          for v between the traces,

i.e. (chord - f)(v) * (u_plus - u_minus).  A jump is entropic when rho <= 0
everywhere between the traces (it then costs nothing) and anti-entropic when
rho >= 0.  The cost rate of a front weighs the positive part of the kernel
by D/sigma and normalises by the jump size.

Fluxes come in three flavours: polynomial (closed forms for every integral),
piecewise linear (exact segment sums; produced by ``FluxModel.linearize``),
and generic callables (adaptive quadrature throughout).  The closed forms
must agree with quadrature to quad_tol; the test suite enforces this.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as npol

from .errors import DegenerateFlux, DomainError, QuadratureFailure
from .quadrature import (
    DEFAULT_QUAD_TOL,
    integrate_adaptive,
    positive_part_breakpoints,
)

STATE_LO = -1.0
STATE_HI = 1.0
DELTA_CAP_DEFAULT = 0.5

ENTROPIC = "entropic"
ANTI_ENTROPIC = "anti-entropic"
MIXED = "mixed"


def _as_poly(coeffs: Sequence[float]) -> Polynomial:
    return Polynomial(np.asarray(list(coeffs), dtype=float))


def _poly_ratio(num: Polynomial, den: Polynomial) -> Polynomial | None:
    """Return num/den as a polynomial when the division is exact."""
    quo, rem = npol.polydiv(num.coef, den.coef)
    scale = max(1.0, float(np.max(np.abs(num.coef))))
    if np.max(np.abs(rem)) <= 1e-14 * scale:
        return Polynomial(quo)
    return None


@dataclass(frozen=True)
class FluxModel:
    """Flux f with diffusion D and mobility sigma on the torus state space.

    Values are immutable after construction; instances are safe to share
    read-only between concurrent evolutions.  Internal memo dictionaries
    only cache pure-function results.
    """

    f: Callable[[float], float]
    fd1: Callable[[float], float]
    fd2: Callable[[float], float]
    diffusion: Callable[[float], float]
    mobility: Callable[[float], float]
    quad_tol: float = DEFAULT_QUAD_TOL
    f_poly: Polynomial | None = None
    d_poly: Polynomial | None = None
    s_poly: Polynomial | None = None
    pwl_nodes: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    label: str = "custom"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_poly(
        cls,
        f_coeffs: Sequence[float],
        d_coeffs: Sequence[float] = (1.0,),
        s_coeffs: Sequence[float] = (1.0,),
        quad_tol: float = DEFAULT_QUAD_TOL,
        label: str = "poly",
    ) -> "FluxModel":
        fp = _as_poly(f_coeffs)
        dp = _as_poly(d_coeffs)
        sp = _as_poly(s_coeffs)
        fd1 = fp.deriv()
        fd2 = fd1.deriv() if len(fd1.coef) > 1 else Polynomial([0.0])
        model = cls(
            f=fp, fd1=fd1, fd2=fd2,
            diffusion=dp, mobility=sp,
            quad_tol=quad_tol,
            f_poly=fp, d_poly=dp, s_poly=sp,
            label=label,
        )
        model._validate()
        return model

    @classmethod
    def burgers(cls, quad_tol: float = DEFAULT_QUAD_TOL) -> "FluxModel":
        """f(u) = u^2 / 2 with D = sigma = 1."""
        return cls.from_poly([0.0, 0.0, 0.5], quad_tol=quad_tol, label="burgers")

    @classmethod
    def cubic(cls, quad_tol: float = DEFAULT_QUAD_TOL) -> "FluxModel":
        """f(u) = u^3 - u with D = sigma = 1 (inflection at u = 0)."""
        return cls.from_poly([0.0, -1.0, 0.0, 1.0], quad_tol=quad_tol, label="cubic")

    @classmethod
    def from_callables(
        cls,
        f: Callable[[float], float],
        fd1: Callable[[float], float],
        fd2: Callable[[float], float],
        diffusion: Callable[[float], float] = lambda u: 1.0,
        mobility: Callable[[float], float] = lambda u: 1.0,
        quad_tol: float = DEFAULT_QUAD_TOL,
        label: str = "callable",
    ) -> "FluxModel":
        model = cls(f=f, fd1=fd1, fd2=fd2, diffusion=diffusion,
                    mobility=mobility, quad_tol=quad_tol, label=label)
        model._validate()
        return model

    @classmethod
    def from_pwl(
        cls,
        xnodes: Sequence[float],
        ynodes: Sequence[float],
        d_coeffs: Sequence[float] = (1.0,),
        s_coeffs: Sequence[float] = (1.0,),
        quad_tol: float = DEFAULT_QUAD_TOL,
        label: str = "pwl",
    ) -> "FluxModel":
        """Piecewise-linear flux interpolating (xnodes, ynodes)."""
        xs = np.asarray(list(xnodes), dtype=float)
        ys = np.asarray(list(ynodes), dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise DomainError("piecewise-linear flux needs matching 1-d node arrays")
        if np.any(np.diff(xs) <= 0):
            raise DomainError("piecewise-linear flux nodes must be strictly increasing")
        slopes = np.diff(ys) / np.diff(xs)

        def f(v, xs=xs, ys=ys):
            return np.interp(v, xs, ys)

        def fd1(v, xs=xs, slopes=slopes):
            idx = np.clip(np.searchsorted(xs, v, side="right") - 1, 0, len(slopes) - 1)
            return slopes[idx] if np.ndim(v) else float(slopes[int(idx)])

        dp = _as_poly(d_coeffs)
        sp = _as_poly(s_coeffs)
        model = cls(
            f=f, fd1=fd1, fd2=lambda v: 0.0 * np.asarray(v, dtype=float),
            diffusion=dp, mobility=sp, quad_tol=quad_tol,
            d_poly=dp, s_poly=sp,
            pwl_nodes=(tuple(float(x) for x in xs), tuple(float(y) for y in ys)),
            label=label,
        )
        model._validate(check_f_derivs=False)
        return model

    @classmethod
    def from_json(cls, spec: dict) -> "FluxModel":
        """Build a model from its JSON description.

        Accepted forms: {"builtin": "burgers"|"cubic"} or per-component
        polynomials {"flux": {"poly": [...]}, "diffusion": {"poly": [...]},
        "mobility": {"poly": [...]}}; flux may also be
        {"pwl": {"x": [...], "y": [...]}}.  quad_tol is an optional field.
        """
        if not isinstance(spec, dict):
            raise DomainError("model spec must be a JSON object")
        quad_tol = float(spec.get("quad_tol", DEFAULT_QUAD_TOL))
        if "builtin" in spec:
            name = spec["builtin"]
            if name == "burgers":
                return cls.burgers(quad_tol=quad_tol)
            if name == "cubic":
                return cls.cubic(quad_tol=quad_tol)
            raise DomainError(f"unknown builtin flux {name!r}")
        if "flux" not in spec:
            raise DomainError("model spec needs 'builtin' or 'flux'")
        flux = spec["flux"]
        d_coeffs = spec.get("diffusion", {"poly": [1.0]}).get("poly")
        s_coeffs = spec.get("mobility", {"poly": [1.0]}).get("poly")
        if d_coeffs is None or s_coeffs is None:
            raise DomainError("diffusion/mobility must be given as {'poly': [...]}")
        if "poly" in flux:
            return cls.from_poly(flux["poly"], d_coeffs, s_coeffs, quad_tol=quad_tol)
        if "pwl" in flux:
            return cls.from_pwl(flux["pwl"]["x"], flux["pwl"]["y"],
                                d_coeffs, s_coeffs, quad_tol=quad_tol)
        raise DomainError("flux must be given as {'poly': [...]} or {'pwl': {...}}")

    def to_json(self) -> dict:
        if self.label in ("burgers", "cubic") and self.quad_tol == DEFAULT_QUAD_TOL:
            return {"builtin": self.label}
        out: dict = {"quad_tol": self.quad_tol}
        if self.pwl_nodes is not None:
            out["flux"] = {"pwl": {"x": list(self.pwl_nodes[0]),
                                   "y": list(self.pwl_nodes[1])}}
        elif self.f_poly is not None:
            out["flux"] = {"poly": [float(c) for c in self.f_poly.coef]}
        else:
            raise DomainError("generic callable models have no JSON form")
        out["diffusion"] = {"poly": [float(c) for c in self.d_poly.coef]}
        out["mobility"] = {"poly": [float(c) for c in self.s_poly.coef]}
        return out

    # -- derived structure -------------------------------------------------

    def _validate(self, check_f_derivs: bool = True) -> None:
        grid = np.linspace(STATE_LO, STATE_HI, 203)[1:-1]
        dvals = np.asarray(self.diffusion(grid), dtype=float)
        svals = np.asarray(self.mobility(grid), dtype=float)
        if np.min(dvals) <= 0.0:
            raise DomainError("diffusion must be strictly positive on (-1, 1)")
        if np.min(svals) <= 0.0:
            raise DomainError("mobility must be strictly positive on (-1, 1)")
        if check_f_derivs and self.f_poly is not None:
            h = 1e-6
            fg = np.asarray(self.f(grid), dtype=float)
            fd = np.asarray(self.fd1(grid), dtype=float)
            approx = (np.asarray(self.f(grid + h)) - np.asarray(self.f(grid - h))) / (2 * h)
            scale = 1.0 + np.max(np.abs(fg))
            if np.max(np.abs(fd - approx)) > 1e-5 * scale:
                raise DomainError("fd1 disagrees with finite differences of f")

    @property
    def signature(self) -> tuple:
        """Hashable identity used for model equality in concatenation."""
        if self.pwl_nodes is not None:
            return ("pwl", self.pwl_nodes,
                    tuple(self.d_poly.coef), tuple(self.s_poly.coef), self.quad_tol)
        if self.f_poly is not None:
            return ("poly", tuple(self.f_poly.coef),
                    tuple(self.d_poly.coef), tuple(self.s_poly.coef), self.quad_tol)
        return ("callable", id(self))

    @property
    def ds_poly(self) -> Polynomial | None:
        """D/sigma as an exact polynomial when the division is exact."""
        if "ds_poly" not in self._cache:
            value = None
            if self.d_poly is not None and self.s_poly is not None:
                value = _poly_ratio(self.d_poly, self.s_poly)
            self._cache["ds_poly"] = value
        return self._cache["ds_poly"]

    def ds_ratio(self, v):
        return np.asarray(self.diffusion(v), dtype=float) / np.asarray(
            self.mobility(v), dtype=float)

    @property
    def f_sup(self) -> float:
        """max |f| on [-1, 1], used to scale sign tolerances."""
        if "f_sup" not in self._cache:
            grid = np.linspace(STATE_LO, STATE_HI, 513)
            self._cache["f_sup"] = float(np.max(np.abs(np.asarray(self.f(grid)))))
        return self._cache["f_sup"]

    @property
    def rho_tol(self) -> float:
        return 1e-12 * (1.0 + self.f_sup)

    def ds_sup(self, lo: float, hi: float) -> float:
        """max of D/sigma on [lo, hi]."""
        grid = np.linspace(lo, hi, 257)
        return float(np.max(self.ds_ratio(grid)))

    def linearize(self, mesh: float, extra_nodes: Sequence[float] = ()) -> "FluxModel":
        """Interpolate f piecewise linearly on a value grid of step <= mesh.

        The grid spans [-1, 1]; extra_nodes (e.g. the values of an initial
        profile) are inserted exactly so that secants between profile values
        match the original flux.  Diffusion and mobility carry over.
        """
        if mesh <= 0:
            raise DomainError("mesh must be positive")
        n = max(2, int(math.ceil((STATE_HI - STATE_LO) / mesh)))
        nodes = set(np.linspace(STATE_LO, STATE_HI, n + 1).tolist())
        for x in extra_nodes:
            if not (STATE_LO <= x <= STATE_HI):
                raise DomainError(f"node {x} outside [-1, 1]")
            nodes.add(float(x))
        xs = sorted(nodes)
        ys = [float(self.f(x)) for x in xs]
        return FluxModel.from_pwl(
            xs, ys,
            d_coeffs=tuple(self.d_poly.coef) if self.d_poly is not None else (1.0,),
            s_coeffs=tuple(self.s_poly.coef) if self.s_poly is not None else (1.0,),
            quad_tol=self.quad_tol,
            label=f"{self.label}-pwl",
        )

    # -- kernel machinery --------------------------------------------------

    def rho_poly(self, u_plus: float, u_minus: float) -> Polynomial:
        if self.f_poly is None:
            raise DomainError("rho_poly needs a polynomial flux")
        fm = float(self.f(u_minus))
        fp = float(self.f(u_plus))
        lin = Polynomial([fm * u_plus - fp * u_minus, fp - fm])
        return lin - self.f_poly * (u_plus - u_minus)

    def _pwl_kernel_samples(self, u_plus: float, u_minus: float):
        """Sample points (flux nodes clipped to the trace interval) and the
        affine-per-segment kernel values there."""
        lo, hi = min(u_minus, u_plus), max(u_minus, u_plus)
        xs = [lo] + [x for x in self.pwl_nodes[0] if lo < x < hi] + [hi]
        vs = np.asarray(xs)
        rho = production_kernel(self, vs, u_plus, u_minus)
        return xs, rho

    def jv_pair(self) -> "EntropyPair":
        """Entropy pair (h, g) with sigma h'' = D and g' = h' f'.

        The production rate of a front is invariant under affine shifts of
        h, so a fixed centering at 0 serves every report.
        """
        if "jv_pair" not in self._cache:
            self._cache["jv_pair"] = _build_jv_pair(self)
        return self._cache["jv_pair"]

    def front_props(self, u_minus: float, u_plus: float) -> "FrontProps":
        """Memoized per-jump quantities: speed, cost rate, production, kind."""
        key = (u_minus, u_plus)
        hit = self._cache.setdefault("front_props", {}).get(key)
        if hit is not None:
            return hit
        speed = rankine_hugoniot(self, u_minus, u_plus)
        rate = shock_cost_rate(self, u_minus, u_plus)
        pair = self.jv_pair()
        prod = entropy_production_rate(self, pair, u_minus, u_plus)
        kind = front_kind(self, u_minus, u_plus)
        props = FrontProps(speed=speed, rate=rate, production=prod, kind=kind)
        self._cache["front_props"][key] = props
        return props


@dataclass(frozen=True)
class FrontProps:
    speed: float
    rate: float
    production: float
    kind: str


@dataclass(frozen=True)
class EntropyPair:
    """Entropy h with conjugated flux g (g' = h' f') and h'' = D/sigma."""
    h: Callable[[float], float]
    g: Callable[[float], float]
    hd2: Callable[[float], float]


@dataclass(frozen=True)
class EinsteinEntropy:
    """h_m(u) = integral from m to u of (u - w) D(w)/sigma(w) dw.

    Vanishes together with its derivative at the center m; second
    derivative is D/sigma.
    """
    center: float
    h: Callable[[float], float]
    hd1: Callable[[float], float]
    hd2: Callable[[float], float]
    h_poly: Polynomial | None = None

    def __call__(self, u):
        return self.h(u)


@dataclass(frozen=True)
class ConvexityWindow:
    """Interval [m - delta0, m + delta0] on which f'' keeps a fixed sign
    pattern: equal signs on both sides of m (case A) or opposite (case B)."""
    center: float
    delta0: float
    case: str
    orientation: str

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return abs(value - self.center) <= self.delta0 + slack

    @property
    def lo(self) -> float:
        return self.center - self.delta0

    @property
    def hi(self) -> float:
        return self.center + self.delta0


# -- operations ------------------------------------------------------------


def _check_state(model: FluxModel, *values: float) -> None:
    for v in values:
        if not (STATE_LO <= v <= STATE_HI):
            raise DomainError(f"state value {v} outside [-1, 1]")


def rankine_hugoniot(model: FluxModel, a: float, b: float) -> float:
    """Shock speed (f(a) - f(b)) / (a - b); f'(a) on the diagonal."""
    _check_state(model, a, b)
    if a == b:
        return float(model.fd1(a))
    return (float(model.f(a)) - float(model.f(b))) / (a - b)


def production_kernel(model: FluxModel, v, u_plus: float, u_minus: float):
    """Entropy production kernel of the jump u_minus -> u_plus at state v.

    Zero outside the closed interval between the traces; antisymmetric in
    the trace pair.  Nonpositive kernels characterise entropic jumps.
    """
    _check_state(model, u_plus, u_minus)
    varr = np.asarray(v, dtype=float)
    fm = float(model.f(u_minus))
    fp = float(model.f(u_plus))
    fv = np.asarray(model.f(varr), dtype=float)
    rho = fm * (u_plus - varr) + fp * (varr - u_minus) - fv * (u_plus - u_minus)
    lo, hi = min(u_minus, u_plus), max(u_minus, u_plus)
    rho = np.where((varr >= lo) & (varr <= hi), rho, 0.0)
    if np.ndim(v) == 0:
        return float(rho)
    return rho


def _poly_positive_integral(model: FluxModel, u_plus: float, u_minus: float,
                            weight: Polynomial | None) -> float:
    """Closed-form integral of weight * max(rho, 0) for polynomial fluxes."""
    lo, hi = min(u_minus, u_plus), max(u_minus, u_plus)
    rho = model.rho_poly(u_plus, u_minus)
    integrand = rho if weight is None else rho * weight
    anti = integrand.integ()
    roots = rho.roots()
    cuts = [lo]
    scale = 1.0 + max(abs(lo), abs(hi))
    for r in roots:
        if abs(r.imag) < 1e-10 * scale and lo < r.real < hi:
            cuts.append(float(r.real))
    cuts.append(hi)
    cuts = sorted(set(cuts))
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 0:
            continue
        if float(rho(0.5 * (a + b))) > 0.0:
            total += float(anti(b) - anti(a))
    return max(total, 0.0)


def _pwl_positive_integral(model: FluxModel, u_plus: float, u_minus: float,
                           weighted: bool) -> float:
    """Exact positive-part integral for piecewise-linear fluxes.

    The kernel is affine between flux nodes, so sign changes are solved
    linearly; the D/sigma weight integrates in closed form when polynomial.
    """
    xs, rho = model._pwl_kernel_samples(u_plus, u_minus)
    wpoly = model.ds_poly if weighted else None
    if weighted and wpoly is None:
        fn = lambda v: float(model.ds_ratio(v)) * production_kernel(model, v, u_plus, u_minus)
    total = 0.0
    for i in range(len(xs) - 1):
        a, b = xs[i], xs[i + 1]
        ra, rb = float(rho[i]), float(rho[i + 1])
        if b <= a or (ra <= 0.0 and rb <= 0.0):
            continue
        # clip the segment to its positive part
        if ra < 0.0 < rb:
            a = a + (b - a) * (-ra) / (rb - ra)
            ra = 0.0
        elif rb < 0.0 < ra:
            b = b - (b - a) * (-rb) / (ra - rb)
            rb = 0.0
        if b <= a:
            continue
        if weighted and wpoly is None:
            total += integrate_adaptive(fn, a, b, model.quad_tol)
            continue
        seg = Polynomial([ra - a * (rb - ra) / (b - a), (rb - ra) / (b - a)])
        if wpoly is not None:
            seg = seg * wpoly
        anti = seg.integ()
        total += float(anti(b) - anti(a))
    return max(total, 0.0)


def _generic_positive_integral(model: FluxModel, u_plus: float, u_minus: float,
                               weighted: bool) -> float:
    lo, hi = min(u_minus, u_plus), max(u_minus, u_plus)
    rho = lambda v: production_kernel(model, v, u_plus, u_minus)
    cuts = [lo] + positive_part_breakpoints(rho, lo, hi) + [hi]
    if weighted:
        fn = lambda v: float(model.ds_ratio(v)) * rho(v)
    else:
        fn = rho
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 0:
            continue
        if rho(0.5 * (a + b)) > 0.0:
            total += integrate_adaptive(fn, a, b, model.quad_tol)
    return max(total, 0.0)


def positive_kernel_integral(model: FluxModel, u_plus: float, u_minus: float,
                             weighted: bool = True) -> float:
    """Integral of max(rho, 0) between the traces, optionally D/sigma-weighted."""
    if u_plus == u_minus:
        return 0.0
    if model.pwl_nodes is not None:
        return _pwl_positive_integral(model, u_plus, u_minus, weighted)
    if model.f_poly is not None:
        weight = model.ds_poly if weighted else None
        if not weighted or weight is not None:
            return _poly_positive_integral(model, u_plus, u_minus, weight)
    return _generic_positive_integral(model, u_plus, u_minus, weighted)


def shock_cost_rate(model: FluxModel, u_minus: float, u_plus: float) -> float:
    """Cost per unit time of holding the jump u_minus -> u_plus:

        integral of (D/sigma)(v) max(rho(v), 0) dv / |u_plus - u_minus|.

    Zero exactly for entropic jumps and for equal traces.
    """
    if u_minus == u_plus:
        return 0.0
    cache = model._cache.setdefault("rate", {})
    key = (u_minus, u_plus)
    if key not in cache:
        val = positive_kernel_integral(model, u_plus, u_minus, weighted=True)
        cache[key] = val / abs(u_plus - u_minus)
    return cache[key]


def front_kind(model: FluxModel, u_minus: float, u_plus: float,
               grid: int = 257) -> str:
    """Classify the sign pattern of the kernel between the traces."""
    if u_minus == u_plus:
        return ENTROPIC
    cache = model._cache.setdefault("kind", {})
    key = (u_minus, u_plus)
    if key in cache:
        return cache[key]
    lo, hi = min(u_minus, u_plus), max(u_minus, u_plus)
    if model.pwl_nodes is not None:
        vs = np.asarray(model._pwl_kernel_samples(u_plus, u_minus)[1])
    else:
        vs = production_kernel(model, np.linspace(lo, hi, grid), u_plus, u_minus)
    tol = model.rho_tol
    top, bot = float(np.max(vs)), float(np.min(vs))
    if top <= tol and bot >= -tol:
        # flat kernel: both orientations admissible, count as entropic
        kind = ENTROPIC
    elif top <= tol:
        kind = ENTROPIC
    elif bot >= -tol:
        kind = ANTI_ENTROPIC
    else:
        kind = MIXED
    cache[key] = kind
    return kind


def production_integral(model: FluxModel, m: float, d1: float, d2: float,
                        check: bool = False) -> float:
    """Signed chord-excess integral of the jump m+d2 -> m+d1 per unit gap:

        C(d1, d2) = (d1 - d2)/2 * (f(m+d1) + f(m+d2))
                    - integral of f from m+d2 to m+d1,

    which equals  integral of rho(v, m+d1, m+d2) dv / |d1 - d2|  for either
    ordering of the offsets (the signed prefactor keeps the identity exact
    when d1 < d2).  Antisymmetric in (d1, d2); positive sign means the jump
    with left trace m+d2 and right trace m+d1 is anti-entropically oriented.
    """
    if d1 == d2:
        return 0.0
    a, b = m + d1, m + d2
    _check_state(model, a, b)
    if model.f_poly is not None:
        anti = model.f_poly.integ()
        intf = float(anti(a) - anti(b))
    else:
        intf = integrate_adaptive(model.f, b, a, model.quad_tol)
    val = 0.5 * (d1 - d2) * (float(model.f(a)) + float(model.f(b))) - intf
    if check:
        rho = lambda v: production_kernel(model, v, a, b)
        ref = integrate_adaptive(rho, min(a, b), max(a, b), model.quad_tol)
        ref /= abs(d1 - d2)
        if abs(val - ref) > 10 * model.quad_tol * (1.0 + abs(ref)):
            raise QuadratureFailure(
                f"production_integral closed form {val} vs quadrature {ref}")
    return val


def einstein_entropy(model: FluxModel, m: float) -> EinsteinEntropy:
    """Einstein entropy centered at m.

    h_m(u) = integral from m to u of (u - w) D(w)/sigma(w) dw, so that
    h_m(m) = h_m'(m) = 0 and h_m'' = D/sigma.  Closed form when D/sigma is
    polynomial, quadrature otherwise.
    """
    _check_state(model, m)
    cache = model._cache.setdefault("einstein", {})
    if m in cache:
        return cache[m]
    ds = model.ds_poly
    if ds is not None:
        q = ds.integ()            # antiderivative of D/sigma
        rw = (Polynomial([0.0, 1.0]) * ds).integ()
        x = Polynomial([0.0, 1.0])
        h_poly = x * q - float(q(m)) * x - rw + float(rw(m))
        hd1_poly = h_poly.deriv()
        ent = EinsteinEntropy(center=m, h=h_poly, hd1=hd1_poly, hd2=ds,
                              h_poly=h_poly)
    else:
        def hd2(u):
            return model.ds_ratio(u)

        def hd1(u, m=m):
            return integrate_adaptive(lambda w: float(model.ds_ratio(w)),
                                      m, u, model.quad_tol)

        def h(u, m=m):
            return integrate_adaptive(
                lambda w: (u - w) * float(model.ds_ratio(w)),
                m, u, model.quad_tol)

        ent = EinsteinEntropy(center=m, h=h, hd1=hd1, hd2=hd2)
    cache[m] = ent
    return ent


def _build_jv_pair(model: FluxModel) -> EntropyPair:
    ent = einstein_entropy(model, 0.0)
    if model.f_poly is not None and ent.h_poly is not None:
        g_poly = (ent.h_poly.deriv() * model.f_poly.deriv()).integ()
        return EntropyPair(h=ent.h_poly, g=g_poly, hd2=ent.hd2)
    if model.pwl_nodes is not None:
        xs, _ = model.pwl_nodes
        xs = np.asarray(xs)
        ys = np.asarray(model.pwl_nodes[1])
        slopes = np.diff(ys) / np.diff(xs)
        hvals = np.asarray([float(ent.h(x)) for x in xs])
        gnodes = np.concatenate(
            [[0.0], np.cumsum(slopes * np.diff(hvals))])

        def g(v, xs=xs, slopes=slopes, hvals=hvals, gnodes=gnodes, ent=ent):
            j = int(np.clip(np.searchsorted(xs, v, side="right") - 1,
                            0, len(slopes) - 1))
            return float(gnodes[j] + slopes[j] * (float(ent.h(v)) - hvals[j]))

        return EntropyPair(h=ent.h, g=g, hd2=ent.hd2)

    def g(v, ent=ent, model=model):
        return integrate_adaptive(
            lambda w: float(ent.hd1(w)) * float(model.fd1(w)),
            0.0, v, model.quad_tol)

    return EntropyPair(h=ent.h, g=g, hd2=ent.hd2)


def entropy_production_rate(model: FluxModel, pair: EntropyPair,
                            u_minus: float, u_plus: float,
                            check: bool = False) -> float:
    """Entropy production s (h(u-) - h(u+)) + g(u+) - g(u-) across a front.

    Equals  integral of h''(v) rho(v, u+, u-) dv / |u+ - u-|; with check=True
    that cross-identity is verified by quadrature to 10 * quad_tol.
    """
    if u_minus == u_plus:
        return 0.0
    s = rankine_hugoniot(model, u_minus, u_plus)
    val = (s * (float(pair.h(u_minus)) - float(pair.h(u_plus)))
           + float(pair.g(u_plus)) - float(pair.g(u_minus)))
    if check:
        lo, hi = min(u_minus, u_plus), max(u_minus, u_plus)
        fn = lambda v: float(pair.hd2(v)) * production_kernel(model, v, u_plus, u_minus)
        points = None
        if model.pwl_nodes is not None:
            points = [x for x in model.pwl_nodes[0] if lo < x < hi]
        ref = integrate_adaptive(fn, lo, hi, model.quad_tol, points=points)
        ref /= abs(u_plus - u_minus)
        if abs(val - ref) > 10 * model.quad_tol * (1.0 + abs(val)):
            raise QuadratureFailure(
                f"production {val} disagrees with kernel integral {ref}")
    return val


def convexity_window(model: FluxModel, m: float,
                     delta_cap: float = DELTA_CAP_DEFAULT,
                     scan: int = 512) -> ConvexityWindow:
    """Largest window [m - d0, m + d0] with single-signed f'' on each side.

    d0 is capped by delta_cap and by the distance to the state boundary;
    the first sign change of f'' on either side is located by scanning and
    bisection (refined to 1e-10).  Case A: the two side signs agree; case B:
    they differ (orientation tells which side is convex).
    """
    if not (STATE_LO < m < STATE_HI):
        raise DomainError(f"window center {m} outside (-1, 1)")
    ztol = 1e-13 * (1.0 + model.f_sup)

    def side_limit(direction: float) -> tuple[float, float]:
        room = (STATE_HI - m) if direction > 0 else (m - STATE_LO)
        limit = min(delta_cap, room * (1.0 - 1e-12))
        xs = m + direction * np.linspace(0.0, limit, scan + 1)[1:]
        vals = np.asarray(model.fd2(xs), dtype=float)
        signs = np.where(np.abs(vals) <= ztol, 0, np.sign(vals))
        nz = np.nonzero(signs)[0]
        if nz.size == 0:
            raise DegenerateFlux(
                f"f'' vanishes identically near {m} (direction {direction:+.0f})")
        zero_run = np.max(np.diff(np.concatenate([[-1], nz]))) - 1
        if zero_run >= 16:
            raise DegenerateFlux(
                f"f'' vanishes on a subinterval near {m} (direction {direction:+.0f})")
        s0 = signs[nz[0]]
        flip = np.nonzero(signs == -s0)[0]
        if flip.size == 0:
            return limit, float(s0)
        i = flip[0]
        prev = nz[nz < i]
        a = xs[prev[-1]] if prev.size else m
        b = xs[i]
        for _ in range(80):
            mid = 0.5 * (a + b)
            vm = float(model.fd2(mid))
            if abs(b - a) < 1e-10:
                break
            if abs(vm) <= ztol or np.sign(vm) == -s0:
                b = mid
            else:
                a = mid
        return abs(0.5 * (a + b) - m), float(s0)

    d_right, s_right = side_limit(+1.0)
    d_left, s_left = side_limit(-1.0)
    delta0 = min(d_right, d_left)
    if s_right == s_left:
        case = "A"
        orientation = "convex" if s_right > 0 else "concave"
    else:
        case = "B"
        orientation = "convex-right" if s_right > 0 else "concave-right"
    return ConvexityWindow(center=m, delta0=delta0, case=case,
                           orientation=orientation)
