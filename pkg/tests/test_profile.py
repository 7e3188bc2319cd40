import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from shockcost import DomainError, PiecewiseConstantProfile, distances, einstein_integral


def test_of_validation():
    with pytest.raises(DomainError):
        PiecewiseConstantProfile.of([0.0, 0.5], [0.1])
    with pytest.raises(DomainError):
        PiecewiseConstantProfile.of([0.5, 0.2], [0.1, 0.2])
    with pytest.raises(DomainError):
        PiecewiseConstantProfile.of([0.0, 1.0], [0.1, 0.2])
    with pytest.raises(DomainError):
        PiecewiseConstantProfile.of([0.0], [1.5])


def test_normalized_fuses_neighbours():
    p = PiecewiseConstantProfile.of([0.1, 0.4, 0.7], [0.2, 0.2, -0.1])
    assert p.pieces == 2
    # cyclic fuse: last piece equal to first
    q = PiecewiseConstantProfile.of([0.0, 0.4, 0.7], [0.2, -0.1, 0.2])
    assert q.pieces == 2
    c = PiecewiseConstantProfile.of([0.2, 0.8], [0.3, 0.3])
    assert c.pieces == 1 and c.breakpoints == (0.0,)


def test_lengths_and_mean():
    p = PiecewiseConstantProfile.of([0.0, 0.25], [0.4, -0.2])
    assert p.lengths() == (0.25, 0.75)
    assert abs(p.mean() - (0.25 * 0.4 - 0.75 * 0.2)) <= 1e-16
    sq = PiecewiseConstantProfile.square_wave(0.0, 0.3)
    assert sq.mean() == 0.0
    assert sq.sup_distance_to(0.0) == 0.3


def test_value_at_and_sample():
    p = PiecewiseConstantProfile.of([0.2, 0.6], [0.5, -0.5])
    assert p.value_at(0.3) == 0.5
    assert p.value_at(0.7) == -0.5
    # before the first breakpoint the last (wrapping) piece is active
    assert p.value_at(0.1) == -0.5
    assert p.value_at(1.3) == 0.5
    got = p.sample([0.25, 0.65])
    assert np.array_equal(got, np.array([0.5, -0.5]))


dyadic = st.integers(min_value=0, max_value=63)


@settings(max_examples=120, deadline=None)
@given(st.sets(dyadic, min_size=2, max_size=6), st.data())
def test_parity_involution_on_dyadic_grid(cuts, data):
    bps = sorted(c / 64.0 for c in cuts)
    vals = [data.draw(st.integers(-8, 8)) / 16.0 for _ in bps]
    # parity() normalizes, so cyclic neighbours must stay distinct
    n = len(vals)
    assume(all(vals[i] != vals[(i + 1) % n] for i in range(n)))
    p = PiecewiseConstantProfile.of(bps, vals, normalize=False)
    q = p.parity().parity()
    assert q.breakpoints == p.breakpoints
    assert q.values == p.values


def test_parity_preserves_mean_and_lengths():
    p = PiecewiseConstantProfile.of([0.1, 0.35, 0.8], [0.2, -0.3, 0.1])
    q = p.parity()
    assert sorted(q.lengths()) == pytest.approx(sorted(p.lengths()), abs=1e-15)
    assert abs(q.mean() - p.mean()) <= 1e-15


def test_distances_zero_and_known():
    p = PiecewiseConstantProfile.of([0.0, 0.5], [0.1, -0.1])
    l1, sup = distances(p, p)
    assert l1 == 0.0 and sup == 0.0
    q = PiecewiseConstantProfile.constant(0.1)
    l1, sup = distances(p, q)
    assert abs(l1 - 0.1) <= 1e-15
    assert abs(sup - 0.2) <= 1e-15


def test_einstein_integral_square(cubic):
    p = PiecewiseConstantProfile.square_wave(0.0, 0.25)
    assert abs(einstein_integral(p, cubic, 0.0) - 0.5 * 0.25**2) <= 1e-14


def test_json_and_csv_round_trip():
    p = PiecewiseConstantProfile.of([0.0, 1.0 / 3.0, 0.75], [0.3, -0.2, 0.05])
    assert PiecewiseConstantProfile.from_json(p.to_json()) == p
    assert PiecewiseConstantProfile.from_csv(p.to_csv()) == p
    with pytest.raises(DomainError):
        PiecewiseConstantProfile.from_csv("nope\n1,2,3\n")
