import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbgap.errors import OutOfRange
from pbgap.profile import (
    AdversaryPair,
    ProfilePoint,
    assess,
    lower_bound_certificate,
    optimize_adversary,
    profile_table,
    random_adversary,
    shrink_normalize,
    upper_bound_witness,
)
from pbgap.symplectic import SupNormReport

Q = 4.0
P = 1.0


@pytest.mark.parametrize("frac", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_witness_distance_and_bracket(pair14, frac):
    s = frac * Q
    w = upper_bound_witness(pair14, s)
    assert abs(w.distance - (0.5 - s / (2 * Q))) <= 1e-9
    assert abs(w.alpha_grid - (0.5 - s / (2 * Q))) <= 1e-9
    assert w.bracket.certified_upper_bound <= 1.01 * s + 1e-12
    assert abs(w.bracket.grid_max - s) <= 1e-9 * max(s, 1)


def test_witness_rejects_s_out_of_range(pair14):
    for s in (-0.1, Q * 1.01):
        with pytest.raises(OutOfRange):
            upper_bound_witness(pair14, s)
    with pytest.raises(OutOfRange):
        profile_table(pair14, [1.0, 5.0])


def test_shrink_of_witness(pair14):
    w = upper_bound_witness(pair14, 1.0)
    sr = shrink_normalize(w, pair14, 1e-3)
    assert all(sr.checks.values()), sr.checks
    assert sr.contraction_ok
    assert sr.bracket_grid_max <= w.bracket.grid_max * (1 + 1e-12)


def test_chain_on_witness_is_consistent(pair14):
    for s in (0.0, 1.0, 2.0):
        w = upper_bound_witness(pair14, s)
        rep = lower_bound_certificate(w, pair14, s=s)
        assert not rep.falsified
        assert rep.predicted <= rep.certified
        assert rep.predicted_linear <= rep.predicted + 1e-15


def _fake(alpha, beta, cert, grid=None):
    grid = cert if grid is None else grid
    rep = SupNormReport(grid, cert, (0.0, 0.0, 0.0, 0.0), (0.1, 0.1))
    return AdversaryPair(None, None, alpha, beta, alpha, beta, rep)


def test_falsification_detector_fires(pair14, family14):
    # a pair impossibly close to (f, g) with tiny bracket must be flagged
    rep = lower_bound_certificate(_fake(0.01, 0.01, 0.1), pair14, s=0.1)
    assert rep.falsified
    out = assess(family14, _fake(0.01, 0.0, 0.0), 0.0, shrink=False)
    assert out.falsified
    # far pairs are never flagged
    out = assess(family14, _fake(0.5, 0.1, 0.0), 0.0, shrink=False)
    assert not out.falsified


def test_chain_clips_negative_factors(pair14):
    rep = lower_bound_certificate(_fake(0.9, 0.1, 0.0), pair14)
    assert rep.predicted == 0.0
    assert not rep.falsified


def test_family_reproduces_witness(pair14, family14):
    s = 1.0
    cert = family14.fg_certificate()
    cF, cG = family14.witness_coefficients(s, cert)
    adv = family14.adversary(cF, cG)
    assert adv.bracket.certified_upper_bound <= s
    assert math.isclose(adv.alpha_grid, 0.5 - s / (2 * Q), rel_tol=1e-3)
    assert adv.beta == 0.0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([0.2, 0.5, 0.8]))
def test_random_adversaries_respect_lower_bound(family14, seed, frac):
    s = frac * P
    rng = np.random.default_rng(seed)
    cF, cG = random_adversary(family14, s, rng)
    adv = family14.adversary(cF, cG)
    out = assess(family14, adv, s, shrink=False)
    assert not out.falsified
    assert out.distance >= 0.5 - out.level / (2 * P) - 1e-2


def test_optimizer_returns_feasible_point(family14):
    s = 0.5
    cF, cG, val = optimize_adversary(family14, s, 40, seed=3)
    assert math.isfinite(val)
    adv = family14.adversary(cF, cG)
    assert adv.bracket.certified_upper_bound <= s
    assert adv.distance >= 0.5 - s / (2 * P) - 1e-2


def test_profile_table_small(pair14, family14):
    grid = [0.8, 0.0, 0.4]
    rows = profile_table(pair14, grid, adversary_budget=0, family=family14, threads=1)
    assert [r.s for r in rows] == grid
    by_s = sorted(rows, key=lambda r: r.s)
    best = [r.best_adversary for r in by_s]
    assert all(b1 >= b2 for b1, b2 in zip(best, best[1:]))
    for r in rows:
        assert isinstance(r, ProfilePoint)
        assert r.lower_bound <= r.best_adversary + 1e-2
        assert abs(r.witness_distance - r.upper_bound) <= 1e-9
        assert not r.falsified
    assert rows[1].lower_bound == 0.5 and rows[1].upper_bound == 0.5


def test_profile_table_empty(pair14):
    assert profile_table(pair14, []) == []


def test_profile_table_threads_match_serial(pair14, family14):
    grid = [0.2, 0.6]
    a = profile_table(pair14, grid, adversary_budget=10, family=family14, threads=1)
    b = profile_table(pair14, grid, adversary_budget=10, family=family14, threads=2)
    assert [r.row() for r in a] == [r.row() for r in b]
