import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shockcost import (
    ANTI_ENTROPIC,
    ENTROPIC,
    MIXED,
    DomainError,
    FluxModel,
    convexity_window,
    einstein_entropy,
    einstein_integral,
    front_kind,
    production_integral,
    production_kernel,
    rankine_hugoniot,
    shock_cost_rate,
    PiecewiseConstantProfile,
)

states = st.floats(min_value=-0.9, max_value=0.9,
                   allow_nan=False, allow_infinity=False)


def test_rankine_hugoniot_burgers_chord(burgers):
    # (f(0) - f(1)) / (0 - 1) = 1/2 for f = u^2/2
    assert rankine_hugoniot(burgers, 0.0, 1.0) == 0.5
    assert rankine_hugoniot(burgers, 0.25, 0.25) == burgers.fd1(0.25)


@settings(max_examples=200, deadline=None)
@given(states, states)
def test_rankine_hugoniot_swap_exact(a, b):
    model = FluxModel.cubic()
    assert rankine_hugoniot(model, a, b) == rankine_hugoniot(model, b, a)


def test_kernel_sign_burgers(burgers):
    # decreasing jump is entropic for a convex flux, increasing is not
    vs = np.linspace(0.05, 0.95, 41)
    down = [production_kernel(burgers, v, u_plus=0.0, u_minus=1.0) for v in vs]
    up = [production_kernel(burgers, v, u_plus=1.0, u_minus=0.0) for v in vs]
    assert max(down) <= 1e-15
    assert min(up) >= -1e-15
    assert front_kind(burgers, 1.0, 0.0) == ENTROPIC
    assert front_kind(burgers, 0.0, 1.0) == ANTI_ENTROPIC


def test_kernel_vanishes_at_traces(cubic):
    for v, tag in ((0.3, "left"), (-0.2, "right")):
        rho = production_kernel(cubic, v, u_plus=-0.2, u_minus=0.3)
        assert abs(rho) <= 1e-15, tag


def test_mixed_kind_across_inflection(cubic):
    # a wide jump across u = 0 changes kernel sign for the cubic
    assert front_kind(cubic, -0.8, 0.8) == MIXED


def test_shock_cost_rate_single_shock_oracle(burgers):
    # rate of the 0 -> 1 anti-entropic shock: integral of (v - v^2)/2 = 1/12
    rate = shock_cost_rate(burgers, 0.0, 1.0)
    assert abs(rate - 1.0 / 12.0) <= 1e-12
    # entropic orientation is free
    assert shock_cost_rate(burgers, 1.0, 0.0) == 0.0


def test_production_integral_cubic_oracles(cubic):
    # closed form at m = 0: C(d, 0) = d^4 / 4
    assert abs(production_integral(cubic, 0.0, 0.4, 0.0) - 0.4**4 / 4) <= 1e-12
    assert abs(production_integral(cubic, 0.0, 0.0, -0.2) + 0.2**4 / 4) <= 1e-12
    got = production_integral(cubic, 0.0, 0.4, 0.2)
    assert abs(got - 0.0012) <= 1e-12


def test_einstein_entropy_basics(cubic):
    h = einstein_entropy(cubic, 0.1)
    assert h(0.1) == 0.0
    # D = sigma = 1 gives h_m(u) = (u - m)^2 / 2
    assert abs(h(0.4) - 0.5 * 0.3**2) <= 1e-12
    p = PiecewiseConstantProfile.square_wave(0.0, 0.2)
    assert abs(einstein_integral(p, cubic, 0.0) - 0.5 * 0.2**2) <= 1e-12


def test_convexity_window_cubic(cubic):
    win = convexity_window(cubic, 0.0)
    assert win.lo < 0.0 < win.hi
    assert win.contains(0.0)
    assert not win.contains(win.hi + 0.5)


def test_json_round_trip_builtin(cubic):
    spec = cubic.to_json()
    assert spec == {"builtin": "cubic"}
    again = FluxModel.from_json(spec)
    assert again.signature == cubic.signature


def test_json_round_trip_poly_and_pwl():
    model = FluxModel.from_poly([0.0, 0.25, 0.5], d_coeffs=[2.0],
                                s_coeffs=[1.0, 0.0, 0.5])
    again = FluxModel.from_json(model.to_json())
    assert again.signature == model.signature

    pwl = FluxModel.from_pwl([-1.0, 0.0, 1.0], [0.5, 0.0, 0.5])
    again = FluxModel.from_json(pwl.to_json())
    assert again.signature == pwl.signature
    assert again.f(0.5) == 0.25


def test_from_json_rejects_garbage():
    with pytest.raises(DomainError):
        FluxModel.from_json({"builtin": "quartic"})
    with pytest.raises(DomainError):
        FluxModel.from_json({"flux": {"spline": []}})


def test_linearize_interpolates(cubic):
    lin = cubic.linearize(0.125, extra_nodes=(0.3,))
    assert lin.pwl_nodes is not None
    xs = lin.pwl_nodes[0]
    assert any(x == 0.3 for x in xs)
    for x in xs:
        assert abs(lin.f(x) - cubic.f(x)) <= 1e-15
    # between nodes the interpolant is a chord, so it differs from the cubic
    mid = 0.5 * (xs[0] + xs[1])
    assert abs(lin.f(mid) - cubic.f(mid)) > 0.0


def test_state_cap_enforced(cubic):
    with pytest.raises(DomainError):
        rankine_hugoniot(cubic, -1.5, 0.0)
