"""Four-set Poisson bracket invariant: feasibility checks and certified upper bounds.

pb4(X0, X1, Y0, Y1) is the infimum of ||{F, G}|| over pairs with F <= 0 on X0,
F >= 1 on X1, G <= 0 on Y0 and G >= 1 on Y1.  Every feasible pair gives an
upper bound; for a rectangle of area A the reference value is 1/A.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import cKDTree

from .construction import RectanglePair, rectangle_pair
from .errors import InfeasibleSpec, NoFeasiblePoint, OverlapInstance
from .symplectic import (
    PlaneFn,
    Resolution,
    SupNormReport,
    TensorFn,
    plane_bracket_sup,
)

logger = logging.getLogger(__name__)

SIDE_NAMES = ("X0", "X1", "Y0", "Y1")
#: grid used inside the minimizer; the interval certificate keeps it tight
SEARCH_RESOLUTION = Resolution(plane=2048)
REVIEW_FACTOR = 0.5


@dataclass(frozen=True)
class Pb4Instance:
    """Four sampled boundary sets, the enclosed area and the domain box."""

    sides: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    area: float
    box: tuple[tuple[float, float], tuple[float, float]]
    overlap_tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "sides", tuple(np.atleast_2d(np.asarray(s, float))
                                                for s in self.sides))

    @classmethod
    def from_rectangle(cls, a: float, b: float, count: int = 256, origin=(0.0, 0.0),
                       box=None) -> "Pb4Instance":
        """X0 = left side, X1 = right side, Y0 = bottom, Y1 = top of [0, a] x [0, b]."""
        x0, y0 = origin
        t = np.linspace(0.0, 1.0, count)
        left = np.stack([np.full(count, x0), y0 + b * t], 1)
        right = np.stack([np.full(count, x0 + a), y0 + b * t], 1)
        bottom = np.stack([x0 + a * t, np.full(count, y0)], 1)
        top = np.stack([x0 + a * t, np.full(count, y0 + b)], 1)
        if box is None:
            box = ((x0 - a, x0 + 3 * a), (y0 - b, y0 + 3 * b))
        return cls((left, right, bottom, top), a * b, box)

    @property
    def X0(self):
        return self.sides[0]

    @property
    def X1(self):
        return self.sides[1]

    @property
    def Y0(self):
        return self.sides[2]

    @property
    def Y1(self):
        return self.sides[3]

    @property
    def reference(self) -> float:
        return 1.0 / self.area

    def overlaps(self) -> bool:
        def meet(P, Q):
            return bool(len(P) and len(Q)
                        and cKDTree(Q).query(P, k=1)[0].min() <= self.overlap_tol)
        return meet(self.X0, self.X1) or meet(self.Y0, self.Y1)

    def validate(self):
        if self.overlaps():
            raise OverlapInstance("X0 meets X1 or Y0 meets Y1: pb4 = +inf by convention")

    def dilated(self, lam: float) -> "Pb4Instance":
        (a, b), (c, d) = self.box
        return Pb4Instance(tuple(s * lam for s in self.sides), self.area * lam ** 2,
                           ((a * lam, b * lam), (c * lam, d * lam)), self.overlap_tol)

    def to_dict(self) -> dict:
        return {"sides": [s.tolist() for s in self.sides], "area": self.area,
                "box": [list(self.box[0]), list(self.box[1])]}

    @classmethod
    def from_dict(cls, data: dict) -> "Pb4Instance":
        box = data["box"]
        return cls(tuple(np.asarray(s, float) for s in data["sides"]), float(data["area"]),
                   ((float(box[0][0]), float(box[0][1])), (float(box[1][0]), float(box[1][1]))))


@dataclass
class FeasibleWitness:
    F: object
    G: object
    margin: float
    bracket: SupNormReport | None = None
    descriptor: dict = field(default_factory=dict)


@dataclass
class Infeasible:
    condition: str
    violation: float

    @property
    def margin(self) -> float:
        return -self.violation


def _evaluate(fn, pts):
    if isinstance(fn, PlaneFn):
        return fn.value(pts[:, 0], pts[:, 1])
    if isinstance(fn, TensorFn):
        return fn.value(pts)
    return np.asarray(fn(pts), float)


def _support_box(fn):
    if isinstance(fn, PlaneFn):
        return fn.support_box()
    if isinstance(fn, TensorFn):
        boxes = [P.support_box() for P, _ in fn.parts]
        return ((min(b[0][0] for b in boxes), max(b[0][1] for b in boxes)),
                (min(b[1][0] for b in boxes), max(b[1][1] for b in boxes)))
    return None


def check_feasible(inst: Pb4Instance, F, G):
    """FeasibleWitness (margin >= 0) or Infeasible with the worst violated condition."""
    inst.validate()
    for name, fn in (("F", F), ("G", G)):
        sb = _support_box(fn)
        if sb is not None:
            (a, b), (c, d) = sb
            (x0, x1), (y0, y1) = inst.box
            if a < x0 or b > x1 or c < y0 or d > y1:
                return Infeasible(f"supp {name} leaves the domain box", math.inf)
    slacks = {
        "F <= 0 on X0": -np.max(_evaluate(F, inst.X0)),
        "F >= 1 on X1": np.min(_evaluate(F, inst.X1)) - 1.0,
        "G <= 0 on Y0": -np.max(_evaluate(G, inst.Y0)),
        "G >= 1 on Y1": np.min(_evaluate(G, inst.Y1)) - 1.0,
    }
    worst = min(slacks, key=slacks.get)
    margin = float(slacks[worst])
    if margin < 0:
        return Infeasible(worst, -margin)
    return FeasibleWitness(F, G, margin)


def _rect_geometry(inst: Pb4Instance):
    pts = np.concatenate(inst.sides)
    x0, y0 = pts.min(axis=0)[:2]
    x1, y1 = pts.max(axis=0)[:2]
    return float(x0), float(y0), float(x1 - x0), float(y1 - y0)


@dataclass
class RectangleFamily:
    """Product pairs F = u(x) v(y), G = e(x) k(y) on an axis-parallel rectangle.

    The free parameters are the two ramp slopes (log-scale); feasibility
    needs slope_x * a > 1 and slope_y * b > 1.  ``margin`` is the room for the
    cutoffs around the rectangle.
    """

    inst: Pb4Instance
    margin: float | None = None

    def __post_init__(self):
        self.x0, self.y0, self.a, self.b = _rect_geometry(self.inst)
        if self.margin is None:
            (bx0, bx1), (by0, by1) = self.inst.box
            room = min(self.x0 - bx0, bx1 - self.x0 - 2 * self.a,
                       self.y0 - by0, (by1 - self.y0 - self.b) / 2)
            self.margin = 0.5 * min(room, 0.25 * min(self.a, self.b))
        if not self.margin > 0:
            raise InfeasibleSpec("domain box leaves no room around the rectangle")

    def build(self, slope_x: float, slope_y: float) -> RectanglePair:
        return rectangle_pair(self.a, self.b, slope_x, slope_y, self.margin, fall=self.a)

    def pair(self, theta) -> tuple[PlaneFn, PlaneFn, dict]:
        tx, ty = (float(np.exp(t)) for t in theta)
        rp = self.build(tx, ty)
        shift = self._shift
        return (shift(rp.f), shift(rp.g),
                {"family": "rectangle", "a": self.a, "b": self.b, "origin": [self.x0, self.y0],
                 "slope_x": tx, "slope_y": ty, "margin": self.margin})

    def _shift(self, P: PlaneFn) -> PlaneFn:
        if self.x0 == 0.0 and self.y0 == 0.0:
            return P
        return PlaneFn(tuple((c, fx.shifted(self.x0), fy.shifted(self.y0))
                             for c, fx, fy in P.terms))

    def seed(self, slopes=None) -> np.ndarray:
        if slopes is None:
            slopes = (1.25 / self.a, 1.25 / self.b)
        return np.log(np.asarray(slopes, float))

    def evaluate(self, theta, res: Resolution = SEARCH_RESOLUTION):
        """(certified bracket sup, witness) or (inf, Infeasible)."""
        try:
            F, G, desc = self.pair(theta)
        except InfeasibleSpec as exc:
            return math.inf, Infeasible(str(exc), math.inf)
        out = check_feasible(self.inst, F, G)
        if isinstance(out, Infeasible):
            return math.inf, out
        out.bracket = plane_bracket_sup(F, G, self.inst.box, res)
        out.descriptor = desc
        return out.bracket.certified_upper_bound, out


@dataclass
class MinimizeResult:
    best_value: float
    witness: FeasibleWitness
    iterations: int
    history: list[float]
    seed: int = 0

    def to_dict(self) -> dict:
        return {"bestValue": self.best_value, "iterations": self.iterations,
                "witnessDescriptor": self.witness.descriptor}


def upper_bound_minimize(inst: Pb4Instance, family: RectangleFamily | None = None,
                         budget: int = 40, seed: int = 0, start=None,
                         res: Resolution = SEARCH_RESOLUTION) -> MinimizeResult:
    """Nelder-Mead over the family; bestValue is the least certified bracket seen on a feasible pair.

    ``history[k]`` is the best value after k + 1 evaluations, hence non-increasing.
    """
    inst.validate()
    family = family or RectangleFamily(inst)
    x0 = family.seed() if start is None else np.asarray(start, float)
    best = {"value": math.inf, "witness": None}
    history: list[float] = []

    def objective(theta):
        val, out = family.evaluate(theta, res)
        if val < best["value"]:
            best["value"], best["witness"] = val, out
        history.append(best["value"])
        if math.isfinite(val):
            return val
        return 1e6 * (1 + out.violation if math.isfinite(out.violation) else 2.0)

    objective(x0)
    if best["witness"] is None:
        raise NoFeasiblePoint("seed pair violates the boundary conditions")
    if budget > 0:
        rng = np.random.default_rng(seed)
        step = 0.1 * rng.choice([-1.0, 1.0], size=x0.size)
        simplex = np.vstack([x0] + [x0 + step[i] * np.eye(x0.size)[i] for i in range(x0.size)])
        minimize(objective, x0, method="Nelder-Mead",
                 options={"maxfev": budget, "initial_simplex": simplex,
                          "xatol": 1e-9, "fatol": 1e-12})
    result = MinimizeResult(best["value"], best["witness"], len(history), history, seed)
    if result.best_value < REVIEW_FACTOR * inst.reference:
        logger.error("REVIEW: bestValue %.6g < %.2g / A on this instance", result.best_value,
                     REVIEW_FACTOR)
    return result


def minimize_restarts(inst: Pb4Instance, seeds, budget: int = 40, threads: int = 1,
                      family: RectangleFamily | None = None) -> MinimizeResult:
    """Independent restarts; ties are broken by seed so the merge is deterministic."""
    family = family or RectangleFamily(inst)

    def run(sd):
        return upper_bound_minimize(inst, family, budget, sd)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(run, seeds))
    else:
        results = [run(sd) for sd in seeds]
    return min(results, key=lambda r: (r.best_value, r.seed))


def review_flag(value: float, inst: Pb4Instance) -> bool:
    """True when a value undercuts half the reference 1/A (points to a feasibility bug)."""
    return value < REVIEW_FACTOR * inst.reference


@dataclass
class MarginRun:
    margin: float
    best_value: float
    witness: FeasibleWitness


@dataclass
class MarginSchedule:
    runs: list[MarginRun]
    extrapolated: float
    reference: float

    @property
    def values(self) -> list[float]:
        return [r.best_value for r in self.runs]

    @property
    def non_increasing(self) -> bool:
        v = self.values
        return all(b <= a for a, b in zip(v, v[1:]))

    @property
    def review(self) -> bool:
        return any(v < REVIEW_FACTOR * self.reference for v in self.values + [self.extrapolated])


def margin_schedule(inst: Pb4Instance, margins, res: Resolution = SEARCH_RESOLUTION,
                    family: RectangleFamily | None = None, splits: int = 5) -> MarginSchedule:
    """For each area margin e the ramps cover a rectangle of area A - e inside the instance.

    Slopes are (1/(a - dx), 1/(b - dy)) with (a - dx)(b - dy) = A - e, so the
    bracket level is 1/(A - e); the split dx is scanned.  The values are
    extrapolated linearly to e = 0.
    """
    family = family or RectangleFamily(inst)
    a, b = family.a, family.b
    A = a * b
    runs = []
    for e in sorted(margins, reverse=True):
        if not 0 < e < A:
            raise InfeasibleSpec(f"margin {e} outside (0, {A})")
        best_val, best_wit = math.inf, None
        for t in (np.arange(splits) + 0.5) / splits:
            dx = t * e / b
            ax = a - dx
            by = (A - e) / ax
            val, out = family.evaluate(np.log([1.0 / ax, 1.0 / by]), res)
            if val < best_val:
                best_val, best_wit = val, out
        if best_wit is None:
            raise NoFeasiblePoint(f"no feasible pair at margin {e}")
        runs.append(MarginRun(float(e), best_val, best_wit))
    es = np.array([r.margin for r in runs])
    vs = np.array([r.best_value for r in runs])
    slope, intercept = np.polyfit(es, vs, 1) if len(runs) > 1 else (0.0, vs[0])
    return MarginSchedule(runs, float(intercept), inst.reference)


def dilate_pair(F: PlaneFn, lam: float) -> PlaneFn:
    """(x, y) -> F(x / lam, y / lam); brackets scale by 1 / lam^2."""
    return PlaneFn(tuple((c, fx.dilated(lam), fy.dilated(lam)) for c, fx, fy in F.terms))


def claim_instance(params, count: int = 256) -> tuple[Pb4Instance, RectangleFamily, np.ndarray]:
    """The rectangle [0, l + e1] x [0, l] (area A = 1/p) with the construction's slopes as seed."""
    a, b = params.l + params.eps1, params.l
    inst = Pb4Instance.from_rectangle(a, b, count)
    family = RectangleFamily(inst, margin=params.eps2)
    seed = family.seed((1 / (params.l + params.eps3), (params.l + params.eps3) / params.l ** 2))
    return inst, family, seed
