import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbgap.errors import InfeasibleSpec
from pbgap.smoothfn import (
    TRANSITION_CURVATURE,
    TRANSITION_SLOPE,
    BumpSpec,
    SmoothFn1D,
    ShrinkMap,
    compose1d,
    descriptor_to_fn,
    make_plateau_cutoff,
    make_ramp,
    make_shrink,
    ramp_feasible,
    transition,
    transition_deriv,
    transition_integral,
)


def test_transition_endpoints_and_symmetry():
    t = np.linspace(-1, 2, 3001)
    s = transition(t)
    assert np.all(s[t <= 0] == 0) and np.all(s[t >= 1] == 1)
    assert np.allclose(transition(t) + transition(1 - t), 1.0, atol=1e-15)


def test_transition_slope_constant():
    t = np.linspace(0, 1, 200001)
    d = transition_deriv(t)
    assert d.max() == pytest.approx(TRANSITION_SLOPE, abs=1e-9)
    assert transition_deriv(0.5) == pytest.approx(2.0, abs=1e-14)
    # the derivative is the derivative of the value
    assert np.allclose(np.gradient(transition(t), t)[1:-1], d[1:-1], atol=1e-6)


def test_transition_curvature_bound():
    t = np.linspace(0, 1, 400001)
    dd = np.gradient(transition_deriv(t), t)
    assert np.abs(dd).max() <= TRANSITION_CURVATURE


def test_transition_integral_total():
    assert transition_integral(1.0) == pytest.approx(0.5, abs=1e-15)
    t = np.linspace(0, 1, 100001)
    trap = np.concatenate([[0], np.cumsum((transition(t[1:]) + transition(t[:-1])) / 2 * np.diff(t))])
    assert np.allclose(transition_integral(t), trap, atol=1e-9)


def test_ramp_hits_target_slope_exactly():
    f = make_ramp(BumpSpec((0.0, 3.0), (1.5, 1.6), rise_target=1.0))
    x = np.linspace(-0.1, 3.1, 400001)
    assert f.rise_slope == 1.0
    assert np.max(f.deriv(x)) == pytest.approx(1.0, abs=1e-12)
    # the plateau is exactly 1 and the support is respected
    assert np.all(f(np.linspace(1.5, 1.6, 101)) == 1.0)
    assert np.all(f(x[(x <= 0) | (x >= 3)]) == 0.0)


def test_ramp_infeasible_when_slope_too_small():
    with pytest.raises(InfeasibleSpec):
        make_ramp(BumpSpec((0.0, 3.0), (1.0, 2.0), rise_target=1.0))
    with pytest.raises(InfeasibleSpec):
        make_plateau_cutoff((0.0, 1.0), (0.0, 0.5))
    assert not ramp_feasible(1.0, 1.0)
    assert ramp_feasible(1.0, 1.01)


def test_plateau_cutoff_is_one_on_plateau():
    h = make_plateau_cutoff((-1.0, 1.0), (-0.5, 0.5))
    assert np.all(h(np.linspace(-0.5, 0.5, 1001)) == 1.0)
    assert h(-1.0) == 0.0 and h(1.0) == 0.0


specs = st.tuples(
    st.floats(-2, 2), st.floats(0.05, 2), st.floats(0.0, 1.0), st.floats(0.05, 2),
    st.floats(1.05, 3.0)
)


@st.composite
def bumps(draw):
    x0, gap1, width, gap2, k = draw(specs)
    c = x0 + gap1
    d = c + width
    support = (x0, d + gap2)
    # the targeted rise needs slope * gap > 1
    return make_ramp(BumpSpec(support, (c, d), rise_target=k / gap1))


@settings(max_examples=40, deadline=None)
@given(bumps())
def test_bump_caps_hold(f):
    lo, hi = f.support
    x = np.linspace(lo - 0.1, hi + 0.1, 20001)
    v = f(x)
    assert v.min() >= 0 and v.max() <= 1
    assert np.abs(f.deriv(x)).max() <= f.deriv_cap * (1 + 1e-12)
    assert np.abs(f.second(x)).max() <= f.second_cap * (1 + 1e-9)
    assert np.max(f.deriv(x)) == pytest.approx(f.rise_slope, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(bumps())
def test_active_intervals_cover_nonzero_derivatives(f):
    lo, hi = f.support
    x = np.linspace(lo - 0.1, hi + 0.1, 20001)
    for order in (1, 2):
        vals = f.evaluate(x, order)
        inside = np.zeros_like(x, dtype=bool)
        for a, b, cap in f.active_intervals(order):
            seg = (x > a) & (x < b)
            inside |= seg
            assert np.abs(vals[seg]).max(initial=0) <= cap * (1 + 1e-9)
        assert np.all(vals[~inside] == 0)


@settings(max_examples=30, deadline=None)
@given(bumps())
def test_second_derivative_matches_finite_differences(f):
    lo, hi = f.support
    x = np.linspace(lo, hi, 200001)
    fd = np.gradient(f.deriv(x), x)
    assert np.max(np.abs(fd - f.second(x))[2:-2]) <= 1e-3 * max(1.0, f.second_cap)


def test_dict_round_trip():
    f = make_ramp(BumpSpec((0.0, 3.0), (1.5, 1.6), rise_target=1.0))
    g = SmoothFn1D.from_dict(f.to_dict())
    assert g == f
    assert descriptor_to_fn(f.to_dict()) == f
    s = make_shrink(0.3, 0.01)
    assert ShrinkMap.from_dict(s.to_dict()) == s


def test_shifted_and_dilated():
    f = make_ramp(BumpSpec((0.0, 3.0), (1.5, 1.6), rise_target=1.0))
    x = np.linspace(-1, 4, 1001)
    assert np.allclose(f.shifted(0.7)(x + 0.7), f(x), atol=1e-12)
    assert np.allclose(f.dilated(2.0)(2 * x), f(x), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(1e-4, 1.0))
def test_shrink_contract(alpha, delta):
    u = make_shrink(alpha, delta)
    x = np.linspace(-3 * alpha - 1, 3 * alpha + 1, 100_000)
    v = u(x)
    assert np.all(v[np.abs(x) <= alpha] == 0)
    assert np.max(np.abs(v - x)) <= (1 + delta) * alpha + 1e-12
    assert np.max(np.abs(u.deriv(x))) <= 1.0
    # monotone up to the interpolation error of the transition integral, and odd
    assert np.all(np.diff(v) >= -1e-15)
    assert np.allclose(u(-x), -v, atol=1e-15)


def test_shrink_identity_for_zero_alpha():
    u = make_shrink(0.0, 0.1)
    x = np.linspace(-2, 2, 101)
    assert np.array_equal(u(x), x)


def test_compose1d_chain_rule():
    u = make_shrink(0.2, 0.1)
    val, grad = compose1d(u, np.array([0.1, 0.5, -0.9]), np.array([1.0, 2.0, 3.0]))
    assert np.allclose(val, u(np.array([0.1, 0.5, -0.9])))
    assert np.all(np.abs(grad) <= np.array([1.0, 2.0, 3.0]))


def test_bad_specs_rejected():
    with pytest.raises(InfeasibleSpec):
        make_ramp(BumpSpec((1.0, 0.0), (0.5, 0.5)))
    with pytest.raises((InfeasibleSpec, ValueError)):
        make_shrink(-1.0, 0.1)
    assert math.isfinite(make_plateau_cutoff((0, 1), (0.4, 0.6)).second_cap)
