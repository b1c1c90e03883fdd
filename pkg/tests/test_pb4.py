import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbgap.construction import derive_params
from pbgap.errors import InfeasibleSpec, NoFeasiblePoint, OverlapInstance
from pbgap.pb4 import (
    FeasibleWitness,
    Infeasible,
    Pb4Instance,
    RectangleFamily,
    check_feasible,
    claim_instance,
    dilate_pair,
    margin_schedule,
    minimize_restarts,
    upper_bound_minimize,
)
from pbgap.symplectic import PlaneBracket, Resolution, plane_bracket_sup

RES = Resolution(plane=1024)


@pytest.fixture(scope="module")
def unit():
    return Pb4Instance.from_rectangle(1.0, 1.0, 64)


def test_seeded_pair_is_feasible(unit):
    fam = RectangleFamily(unit)
    val, out = fam.evaluate(fam.seed(), RES)
    assert isinstance(out, FeasibleWitness)
    assert out.margin == 0.0
    assert math.isclose(val, 1.25 ** 2, rel_tol=1e-2)


def test_too_shallow_ramp_is_rejected(unit):
    fam = RectangleFamily(unit)
    val, out = fam.evaluate(np.log([0.9, 2.0]), RES)
    assert val == math.inf
    assert isinstance(out, Infeasible)


def test_check_feasible_reports_worst_condition(unit):
    fam = RectangleFamily(unit)
    F, G, _ = fam.pair(fam.seed())
    out = check_feasible(unit, G, F)
    assert isinstance(out, Infeasible)
    assert out.violation > 0
    assert out.margin < 0


def test_overlap_instance(unit):
    pts = unit.X0
    bad = Pb4Instance((pts, pts.copy(), unit.Y0, unit.Y1), 1.0, unit.box)
    assert bad.overlaps()
    with pytest.raises(OverlapInstance):
        upper_bound_minimize(bad, budget=0)
    with pytest.raises(OverlapInstance):
        check_feasible(bad, None, None)


def test_history_is_non_increasing(unit):
    res = upper_bound_minimize(unit, budget=15, seed=1, res=RES)
    h = res.history
    assert len(h) == res.iterations
    assert all(a >= b for a, b in zip(h, h[1:]))
    assert res.best_value == h[-1]
    assert res.best_value >= 0.5 / unit.area


def test_seeded_claim_run_gives_q():
    pr = derive_params(1.0, 4.0)
    inst, fam, seed = claim_instance(pr, 64)
    res = upper_bound_minimize(inst, fam, budget=0, start=seed)
    assert math.isclose(res.best_value, pr.q, rel_tol=1e-2)
    assert json.loads(json.dumps(res.to_dict()))["bestValue"] == res.best_value


def test_margin_schedule():
    pr = derive_params(1.0, 4.0)
    inst, fam, _ = claim_instance(pr, 64)
    sched = margin_schedule(inst, [m * pr.l ** 2 for m in (0.2, 0.1, 0.05)], family=fam)
    assert sched.non_increasing
    assert sched.extrapolated <= 1.1 / inst.area
    assert min(sched.values) >= 0.5 / inst.area
    assert not sched.review
    with pytest.raises(InfeasibleSpec):
        margin_schedule(inst, [2 * inst.area], family=fam)


def test_no_feasible_seed(unit):
    fam = RectangleFamily(unit)
    with pytest.raises(NoFeasiblePoint):
        upper_bound_minimize(unit, fam, budget=0, start=np.log([0.5, 0.5]))


def test_restarts_are_deterministic(unit):
    a = minimize_restarts(unit, [0, 1], budget=6, threads=1)
    b = minimize_restarts(unit, [0, 1], budget=6, threads=2)
    assert a.best_value == b.best_value and a.seed == b.seed


@settings(max_examples=10, deadline=None)
@given(st.floats(0.3, 3.0))
def test_scale_covariance(lam):
    """Dilating the instance by lam multiplies the pb4 value by 1 / lam^2."""
    inst = Pb4Instance.from_rectangle(1.0, 0.8, 32)
    fam = RectangleFamily(inst)
    F, G, _ = fam.pair(fam.seed())
    base = plane_bracket_sup(F, G, inst.box, RES).grid_max
    big = inst.dilated(lam)
    Fl, Gl = dilate_pair(F, lam), dilate_pair(G, lam)
    assert isinstance(check_feasible(big, Fl, Gl), FeasibleWitness)
    xs = np.linspace(*big.box[0], 401)
    ys = np.linspace(*big.box[1], 401)
    xs0, ys0 = xs / lam, ys / lam
    B1 = PlaneBracket(Fl, Gl).grid(xs, ys)
    B0 = PlaneBracket(F, G).grid(xs0, ys0)
    assert np.allclose(B1, B0 / lam ** 2, rtol=1e-9, atol=1e-12 * base)
    assert math.isclose(big.reference, inst.reference / lam ** 2, rel_tol=1e-12)


def test_instance_round_trip(unit):
    data = json.loads(json.dumps(unit.to_dict()))
    back = Pb4Instance.from_dict(data)
    assert back.area == unit.area and back.box == unit.box
    for s0, s1 in zip(unit.sides, back.sides):
        assert np.array_equal(s0, s1)


def test_family_needs_room():
    inst = Pb4Instance.from_rectangle(1.0, 1.0, 16, box=((0.0, 1.0), (0.0, 1.0)))
    with pytest.raises(InfeasibleSpec):
        RectangleFamily(inst)
