import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbgap.construction import (
    build_claim_pair,
    build_theorem_pair,
    corollary_q,
    corollary_rescale,
    derive_params,
    rectangle_pair,
    solve_eps2,
    verify_pair,
)
from pbgap.errors import BadOrder, ParamMismatch
from pbgap.symplectic import Resolution, plane_bracket_sup

from conftest import theorem_pair


@st.composite
def orders(draw):
    q = draw(st.floats(0.05, 200.0))
    ratio = draw(st.floats(0.01, 0.99))
    return ratio * q, q


def test_parameters_for_reference_case():
    pr = derive_params(1.0, 4.0)
    assert pr.l == 0.5
    assert pr.eps == 0.75
    assert pr.eps1 == 1.5
    assert pr.eps3 == min(pr.eps1, pr.eps2) / 2
    # exact root of 9x^2 + (9l + 3 e1) x - eps = 0
    B = 9 * pr.l + 3 * pr.eps1
    assert math.isclose(pr.eps2, (-B + math.sqrt(B * B + 36 * pr.eps)) / 18, rel_tol=1e-14)
    assert math.isclose(1 / pr.area, 1.0)
    assert pr.rho1 < pr.rho < pr.rho2 < pr.annulus_radius


@settings(max_examples=100, deadline=None)
@given(orders())
def test_eps2_residual(pq):
    pr = derive_params(*pq)
    assert pr.eps2 > 0
    assert abs(pr.eps2_residual()) <= 1e-12 * max(1.0, pr.disc_area)


def test_eps2_small_eps_is_stable():
    l = 1.0
    for eps in (1e-4, 1e-8, 1e-12):
        x = solve_eps2(l, eps / l, eps)
        assert math.isclose(x, eps / (9 * l + 3 * eps), rel_tol=1e-3)


@settings(max_examples=20, deadline=None)
@given(orders())
def test_slope_product_is_q(pq):
    pr = derive_params(*pq)
    c = build_claim_pair(pr)
    xs = np.linspace(*c.box[0], 20001)
    ys = np.linspace(*c.box[1], 20001)
    u1_sup = np.abs(c.u1.deriv(xs)).max()
    v_sup = np.abs(c.v2.deriv(ys) * c.v1(ys)).max()
    assert math.isclose(c.u1.deriv_cap, 1 / (pr.l + pr.eps3), rel_tol=1e-12)
    assert math.isclose(u1_sup * v_sup, 1 / pr.l ** 2, rel_tol=1e-6)
    assert math.isclose(c.analytic_bracket_sup, pr.q, rel_tol=1e-12)


def test_bad_order():
    for p, q in ((2.0, 1.0), (1.0, 1.0), (0.0, 1.0), (-1.0, 2.0)):
        with pytest.raises(BadOrder):
            derive_params(p, q)


def test_claim_boundary_values():
    c = build_claim_pair(derive_params(1.0, 4.0))
    ys = np.linspace(0, c.b, 101)
    xs = np.linspace(0, c.a, 101)
    f, g = c.f, c.g
    assert np.all(f.value(np.zeros_like(ys), ys) == 0)
    assert np.all(f.value(np.full_like(ys, c.a), ys) == 1)
    assert np.all(g.value(xs, np.zeros_like(xs)) == 0)
    assert np.all(g.value(xs, np.full_like(xs, c.b)) == 1)


def test_rectangle_pair_certified_bracket():
    c = rectangle_pair(1.0, 2.0, 1.25, 0.625, 0.2)
    rep = plane_bracket_sup(c.f, c.g, c.box, Resolution(plane=1024))
    assert math.isclose(rep.grid_max, 1.25 * 0.625, rel_tol=1e-12)
    assert rep.certified_upper_bound <= 1.01 * rep.grid_max


@pytest.mark.parametrize("p,q,n", [(1.0, 4.0, 2), (1.0, 4.0, 3), (0.5, 2.0, 2)])
def test_verify_pair(p, q, n):
    pair = theorem_pair(p, q, n)
    checks, numbers = verify_pair(pair, samples=300)
    bad = [c for c in checks if not c.ok]
    assert not bad, bad
    assert numbers["norm_f"]["gridMax"] == 1.0


def test_side_points_lie_on_radial_plateau(pair14):
    pts = pair14.side_points("a3", count=50, angles=4)
    r = np.hypot(pts[:, 2], pts[:, 3])
    assert np.all(pair14.radial(r) == 1.0)
    assert np.all(pts[:, 0] == pair14.claim.a)


def test_cutoff_is_one_on_supports(pair14):
    h = pair14.cutoff()
    rng = np.random.default_rng(0)
    pts = pair14.space.sample(rng, 5000)
    on = (pair14.f.value(pts) != 0) | (pair14.g.value(pts) != 0)
    assert on.any()
    assert np.all(h.value(pts[on]) == 1.0)


def test_pair_round_trip(pair14):
    data = json.loads(json.dumps(pair14.to_dict()))
    back = type(pair14).from_dict(data)
    pts = pair14.space.sample(np.random.default_rng(1), 200)
    assert np.array_equal(back.f.value(pts), pair14.f.value(pts))
    assert np.array_equal(back.g.value(pts), pair14.g.value(pts))


def test_corollary_rescale():
    C = 1.0
    pair = build_theorem_pair(derive_params(corollary_q(C) / 2, corollary_q(C)))
    f1, g1, rep = corollary_rescale(pair, C)
    assert math.isclose(rep.bracket.certified_upper_bound, 1.0, rel_tol=1e-2)
    assert math.isclose(rep.bracket.grid_max, 1.0, rel_tol=1e-2)
    assert rep.rho_zero_rescaled == 4.0
    with pytest.raises(ParamMismatch):
        corollary_rescale(pair, 2.0)
    with pytest.raises(ValueError):
        corollary_rescale(pair, -1.0)
