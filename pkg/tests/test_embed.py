import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbgap.embed import MonomialCurve, check_containment, check_injective, pick_k, symplectic_area


@pytest.mark.parametrize("k", range(1, 11))
def test_area_matches_closed_form(k):
    curve = MonomialCurve(k)
    assert abs(symplectic_area(curve) - math.pi * (k + 1)) <= 1e-6


def test_area_independent_oracle():
    """Monte Carlo over the disc agrees with the quadrature to sampling accuracy."""
    rng = np.random.default_rng(0)
    curve = MonomialCurve(3)
    m = 400_000
    r = np.sqrt(rng.random(m))
    th = 2 * np.pi * rng.random(m)
    est = math.pi * curve.density(r * np.cos(th), r * np.sin(th)).mean()
    assert abs(est - symplectic_area(curve)) <= 0.05


def test_containment_and_injectivity():
    for k in (1, 5, 9):
        curve = MonomialCurve(k, 3)
        assert check_containment(curve, 100_000) <= 2 * (1 + 1e-12)
        assert check_injective(curve)
        assert curve(np.array([1.0])).shape == (1, 3)


def test_pick_k_examples():
    assert pick_k(10 * math.pi) == 9
    assert pick_k(1.0) == 1
    assert pick_k(2 * math.pi) == 1
    assert pick_k(2 * math.pi + 1e-6) == 2


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 1e4))
def test_pick_k_is_minimal(target):
    k = pick_k(target)
    assert math.pi * (k + 1) >= target * (1 - 1e-12)
    assert k == 1 or math.pi * k < target


def test_invalid_inputs():
    with pytest.raises(ValueError):
        MonomialCurve(0)
    with pytest.raises(ValueError):
        MonomialCurve(2, 1)
    with pytest.raises(ValueError):
        pick_k(-1.0)
    with pytest.raises(ValueError):
        symplectic_area(MonomialCurve(1), tol=0)
