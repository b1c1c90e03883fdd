"""Both sides of the profile estimate 1/2 - s/(2p) <= rho_{f,g}(s) <= 1/2 - s/(2q).

The upper side is witnessed by F = (1/2 - s/(2q)) h + (s/q) f, G = g.  The lower
side cannot be computed; instead adversarial pairs with ||{F, G}|| <= s are
searched for, and every one of them is pushed through the shrink-and-rescale
chain that underlies the lower bound.  A certified violation is reported as a
falsification event.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from .construction import TheoremPair
from .errors import OutOfRange
from .smoothfn import ShrinkMap, make_plateau_cutoff, make_shrink
from .symplectic import (
    DEFAULT_RESOLUTION,
    PlaneFn,
    Resolution,
    SupNormReport,
    TensorFn,
    bracket_sup,
    norm_sup,
    reduced_bracket,
    reduced_values,
)
from .symplectic import _cell_range

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 1e-3
FALSIFICATION_TOL = 1e-2


@dataclass(frozen=True)
class ProfilePoint:
    s: float
    lower_bound: float
    upper_bound: float
    witness_distance: float
    best_adversary: float
    bracket_sup_at_witness: float
    falsified: bool = False

    CSV_FIELDS = ("s", "lowerBound", "upperBound", "witnessDistance", "bestAdversary",
                  "bracketSupAtWitness")

    def row(self) -> list[float]:
        return [self.s, self.lower_bound, self.upper_bound, self.witness_distance,
                self.best_adversary, self.bracket_sup_at_witness]


@dataclass
class AdversaryPair:
    """A candidate (F, G) with its distances to (f, g) and bracket sup-norm.

    ``alpha``/``beta`` are upper bounds on ||F - f||, ||G - g|| (certified or
    proven); the ``*_grid`` values are grid maxima, hence lower estimates.
    """

    F: object
    G: object
    alpha: float
    beta: float
    alpha_grid: float
    beta_grid: float
    bracket: SupNormReport
    meta: dict = field(default_factory=dict)

    @property
    def distance(self) -> float:
        return self.alpha + self.beta


def _check_s(pair: TheoremPair, s: float):
    q = pair.params.q
    if not (0.0 <= s <= q):
        raise OutOfRange(f"s={s} outside [0, {q}]")


def upper_bound_witness(pair: TheoremPair, s: float,
                        res: Resolution = DEFAULT_RESOLUTION) -> AdversaryPair:
    """F = (1/2 - s/2q) h + (s/q) f and G = g; note f h = f since h = 1 on supp f."""
    _check_s(pair, s)
    q = pair.params.q
    a = 0.5 - s / (2 * q)
    b = s / q
    h = pair.cutoff()
    F = h * a + pair.f * b
    G = pair.g
    dist = norm_sup(F - pair.f, pair.space, res)
    rep = bracket_sup(F, G, pair.space, res)
    # F - f = a (h - 2f) with 0 <= f <= h = 1 on supp f, so ||F - f|| = a exactly
    return AdversaryPair(F, G, a, 0.0, dist.grid_max, 0.0, rep,
                         meta={"kind": "witness", "s": s, "a": a, "b": b,
                               "alpha_certified": dist.certified_upper_bound})


@dataclass(frozen=True)
class ComposedFn:
    """outer(inner(x)) for a shrink map and a tensor function."""

    outer: ShrinkMap
    inner: TensorFn

    def value(self, pts):
        return self.outer(self.inner.value(pts))

    __call__ = value

    def grad(self, pts):
        return self.outer.deriv(self.inner.value(pts))[..., None] * self.inner.grad(pts)


@dataclass
class ShrinkResult:
    F: ComposedFn
    G: ComposedFn
    delta: float
    alpha: float
    beta: float
    bracket_grid_max: float
    bracket_certified: float
    inner_bracket: SupNormReport
    checks: dict

    @property
    def contraction_ok(self) -> bool:
        return self.bracket_grid_max <= self.inner_bracket.certified_upper_bound


def _reduced_axes(pair: TheoremPair, res: Resolution):
    (x0, x1), (y0, y1) = pair.space.plane_box
    c = pair.claim
    xs = np.union1d(np.linspace(x0, x1, res.reduced_plane),
                    [c.u1.plateau[0], c.u1.rise_start, c.u1.fall_end, 0.0, c.a])
    ys = np.union1d(np.linspace(y0, y1, res.reduced_plane), [0.0, c.b, c.v2.rise_start])
    rs = np.union1d(np.linspace(0.0, pair.space.annulus_radius, res.reduced_radial),
                    [0.0, pair.params.rho])
    return xs, ys, rs


def shrink_normalize(adv: AdversaryPair, pair: TheoremPair, delta: float = DEFAULT_DELTA,
                     res: Resolution = DEFAULT_RESOLUTION) -> ShrinkResult:
    """F' = u o F, G' = v o G with u = 0 on [-alpha, alpha], |u - id| <= (1+delta) alpha, |u'| <= 1."""
    u = make_shrink(adv.alpha, delta)
    v = make_shrink(adv.beta, delta)
    Fp = ComposedFn(u, adv.F)
    Gp = ComposedFn(v, adv.G)

    xs, ys, rs = _reduced_axes(pair, res)
    Fr = reduced_values(adv.F, xs, ys, rs)
    Gr = reduced_values(adv.G, xs, ys, rs)
    fr = reduced_values(pair.f, xs, ys, rs)
    gr = reduced_values(pair.g, xs, ys, rs)
    Fpr = u(Fr)
    Gpr = v(Gr)
    lo_f = 1 - (2 + delta) * adv.alpha
    lo_g = 1 - (2 + delta) * adv.beta
    checks = {
        "F'=0 where f=0": bool(np.all(Fpr[fr == 0] == 0)),
        "G'=0 where g=0": bool(np.all(Gpr[gr == 0] == 0)),
        "F'>=1-(2+d)alpha where f=1": bool(np.all(Fpr[fr == 1] >= lo_f)),
        "G'>=1-(2+d)beta where g=1": bool(np.all(Gpr[gr == 1] >= lo_g)),
    }
    for side, fn, target, lo in (("a1", Fp, 0.0, None), ("a3", Fp, None, lo_f),
                                 ("a2", Gp, 0.0, None), ("a4", Gp, None, lo_g)):
        vals = fn.value(pair.side_points(side, count=128, angles=4))
        checks[f"on {side}"] = bool(np.all(vals == target) if lo is None else np.all(vals >= lo))

    inner = adv.bracket
    br = reduced_bracket(adv.F, adv.G, xs, ys, rs)
    composed = u.deriv(Fr) * v.deriv(Gr) * br
    gm = float(np.max(np.abs(composed)))
    # |u'|, |v'| <= 1 pointwise, so the inner certificate also bounds the composed bracket
    return ShrinkResult(Fp, Gp, delta, adv.alpha, adv.beta, gm,
                        inner.certified_upper_bound, inner, checks)


@dataclass(frozen=True)
class LowerBoundReport:
    predicted: float
    predicted_linear: float
    limit_at_t: float
    measured: float
    certified: float
    falsified: bool

    def to_dict(self) -> dict:
        return asdict(self)


def lower_bound_certificate(adv: AdversaryPair, pair: TheoremPair, pb4_ref: float | None = None,
                            delta: float = DEFAULT_DELTA, s: float | None = None) -> LowerBoundReport:
    """(1 - (2+d) alpha)(1 - (2+d) beta) * pb4_ref must not exceed the bracket sup.

    The pb4 reference 1/(l^2 + eps) = p is consumed as a number.  An event is
    raised only when even the certified upper bound of the bracket falls
    below the prediction.  Negative factors make the chain vacuous and are
    clipped at 0.
    """
    ref = pair.params.p if pb4_ref is None else pb4_ref
    c1 = 1 - (2 + delta) * adv.alpha
    c2 = 1 - (2 + delta) * adv.beta
    predicted = max(c1, 0.0) * max(c2, 0.0) * ref
    linear = (1 - (2 + delta) * (adv.alpha + adv.beta)) * ref
    if s is None:
        limit = float("nan")
    else:
        t = 0.5 - s / (2 * pair.params.p)
        limit = (1 - 2 * t) * ref
    cert = adv.bracket.certified_upper_bound
    falsified = cert < predicted
    if falsified:
        logger.error("FALSIFICATION EVENT: bracket <= %.6g but chain predicts %.6g", cert, predicted)
    return LowerBoundReport(predicted, linear, limit, adv.bracket.grid_max, cert, falsified)


# ---------------------------------------------------------------------------
# adversary family


class BumpFamily:
    """F = sum_k cF_k D_k(z) h(|w|), G = sum_k cG_k D_k(z) h(|w|) over a fixed dictionary.

    D_0 = f-plane, D_1 = g-plane, D_2 = plane cutoff (1 on both supports), then
    a grid of small plateau bumps.  All members share the annulus profile of
    (f, g), so every sup-norm reduces to the plane and is evaluated with
    precomputed factor matrices.
    """

    def __init__(self, pair: TheoremPair, bumps: tuple[int, int] = (6, 4),
                 resolution: int = 512):
        self.pair = pair
        c = pair.claim
        (bx0, bx1), (by0, by1) = pair.space.plane_box
        hx = make_plateau_cutoff((bx0, bx1), (min(c.u1.support[0], c.u2.support[0]),
                                              max(c.u1.support[1], c.u2.support[1])))
        hy = make_plateau_cutoff((by0, by1), (min(c.v1.support[0], c.v2.support[0]),
                                              max(c.v1.support[1], c.v2.support[1])))
        dictionary = [(c.u1, c.v1), (c.u2, c.v2), (hx, hy)]
        # bumps live where the cutoff is 1, so their brackets with it vanish
        (ix0, ix1), (iy0, iy1) = hx.plateau, hy.plateau
        nx, ny = bumps
        wx = (ix1 - ix0) / (nx + 2)
        wy = (iy1 - iy0) / (ny + 2)
        for cx in np.linspace(ix0 + 1.5 * wx, ix1 - 1.5 * wx, nx):
            for cy in np.linspace(iy0 + 1.5 * wy, iy1 - 1.5 * wy, ny):
                fx = make_plateau_cutoff((cx - 1.5 * wx, cx + 1.5 * wx), (cx - wx / 2, cx + wx / 2))
                fy = make_plateau_cutoff((cy - 1.5 * wy, cy + 1.5 * wy), (cy - wy / 2, cy + wy / 2))
                dictionary.append((fx, fy))
        self.dictionary = dictionary
        self.K = len(dictionary)
        self.radial = pair.radial
        self.n = pair.params.n
        self._grids = {}
        self._fg = {}
        self.resolution = resolution
        self.generic_terms = 6
        self.base_f = np.eye(self.K)[0]
        self.base_g = np.eye(self.K)[1]

    def _grid(self, resolution: int):
        if resolution not in self._grids:
            (bx0, bx1), (by0, by1) = self.pair.space.plane_box
            kx = [v for fx, _ in self.dictionary for v in fx.plateau]
            ky = [v for _, fy in self.dictionary for v in fy.plateau]
            xs = np.union1d(np.linspace(bx0, bx1, resolution), kx)
            ys = np.union1d(np.linspace(by0, by1, resolution), ky)
            self._grids[resolution] = (_AxisData(xs, [fx for fx, _ in self.dictionary]),
                                       _AxisData(ys, [fy for _, fy in self.dictionary]))
        return self._grids[resolution]

    def distance(self, coef, base, resolution: int | None = None) -> SupNormReport:
        """sup |sum (coef - base)_k D_k| (the annulus factor has sup 1).

        Certified cell by cell: the smaller of an interval-arithmetic bound
        (all dictionary factors take values in [0, 1]) and a local Lipschitz
        bound from the corner values.
        """
        X, Y = self._grid(resolution or self.resolution)
        d = np.asarray(coef, float) - base
        A = np.abs((X.v[0] * d) @ Y.v[0].T)
        pos, neg = np.maximum(d, 0), np.minimum(d, 0)
        upper = (X.hi * pos) @ Y.hi.T + (X.lo * neg) @ Y.lo.T
        lower = (X.lo * pos) @ Y.lo.T + (X.hi * neg) @ Y.hi.T
        interval = np.maximum(upper, -lower)
        ad = np.abs(d)
        lip = (_corners(A) + (X.h[:, None] / 2) * ((X.m[1] * ad) @ Y.m[0].T)
               + (Y.h[None, :] / 2) * ((X.m[0] * ad) @ Y.m[1].T))
        return _report(A, np.minimum(interval, lip), X, Y)

    def bracket(self, cF, cG, resolution: int | None = None) -> SupNormReport:
        """sup |{F, G}| = sup_z |{P_F, P_G}| * sup h^2 (= 1 since h = 1 on S^1_rho).

        Certified cell by cell with local bounds on the partial derivatives of
        the bracket, assembled from per-cell maxima of the dictionary factors.
        """
        X, Y = self._grid(resolution or self.resolution)
        # the cutoff is 1 near every other support, so it Poisson-commutes with the family
        cF = np.asarray(cF, float).copy()
        cG = np.asarray(cG, float).copy()
        cF[2] = cG[2] = 0.0

        def partial(c, ox, oy):
            return (X.v[ox] * c) @ Y.v[oy].T

        def bound(c, ox, oy):
            return (X.m[ox] * c) @ Y.m[oy].T

        B = partial(cF, 1, 0) * partial(cG, 0, 1) - partial(cF, 0, 1) * partial(cG, 1, 0)
        A = np.abs(B)
        aF, aG = np.abs(cF), np.abs(cG)
        P = {k: bound(aF, *k) for k in ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2))}
        Q = {k: bound(aG, *k) for k in ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2))}
        interval = P[1, 0] * Q[0, 1] + P[0, 1] * Q[1, 0]
        dx = P[2, 0] * Q[0, 1] + P[1, 0] * Q[1, 1] + P[1, 1] * Q[1, 0] + P[0, 1] * Q[2, 0]
        dy = P[1, 1] * Q[0, 1] + P[1, 0] * Q[0, 2] + P[0, 2] * Q[1, 0] + P[0, 1] * Q[1, 1]
        lip = _corners(A) + (X.h[:, None] / 2) * dx + (Y.h[None, :] / 2) * dy
        return _report(A, np.minimum(interval, lip), X, Y)

    def tensor(self, coef) -> TensorFn:
        plane = PlaneFn.zero()
        for c, (fx, fy) in zip(coef, self.dictionary):
            if c != 0:
                plane = plane + PlaneFn.product(fx, fy, float(c))
        return TensorFn.product(plane, self.radial, self.n)

    def adversary(self, cF, cG, resolutions=(None,)) -> AdversaryPair:
        """Evaluate at each resolution and keep the tightest certificates."""
        reps = [(self.distance(cF, self.base_f, r), self.distance(cG, self.base_g, r),
                 self.bracket(cF, cG, r)) for r in resolutions]
        da = min((r[0] for r in reps), key=lambda x: x.certified_upper_bound)
        db = min((r[1] for r in reps), key=lambda x: x.certified_upper_bound)
        br = _lift(min((r[2] for r in reps), key=lambda x: x.certified_upper_bound),
                   self.n, self.pair.params.rho)
        F, G = self.tensor(cF), self.tensor(cG)
        if np.count_nonzero(cF) + np.count_nonzero(cG) <= self.generic_terms:
            # few terms: the interval certificate of the generic path is affordable
            gen = bracket_sup(F, G, self.pair.space)
            if gen.certified_upper_bound < br.certified_upper_bound:
                br = gen
        return AdversaryPair(F, G, da.certified_upper_bound, db.certified_upper_bound,
                             da.grid_max, db.grid_max, br,
                             meta={"cF": list(map(float, cF)), "cG": list(map(float, cG))})

    def fg_certificate(self, res: Resolution = DEFAULT_RESOLUTION) -> float:
        """Certified ||{f, g}||, cached per resolution."""
        if res not in self._fg:
            self._fg[res] = bracket_sup(self.pair.f, self.pair.g, self.pair.space,
                                        res).certified_upper_bound
        return self._fg[res]

    def witness_coefficients(self, s: float, bracket_cert: float):
        """In-family witness: F = b f + (1 - b)/2 * cutoff, G = g, with b * cert{f,g} = s."""
        # the margin keeps b * cert strictly below s after rounding
        b = min(1.0, s / bracket_cert * (1 - 1e-12)) if bracket_cert > 0 else 1.0
        cF = np.zeros(self.K)
        cF[0] = b
        cF[2] = (1 - b) / 2
        return cF, self.base_g.copy()


class _AxisData:
    """Dictionary factors on one grid axis: node values and per-cell enclosures."""

    def __init__(self, xs, fns):
        self.x = xs
        self.h = np.diff(xs)
        self.v = [np.stack([fn.evaluate(xs, k) for fn in fns], 1) for k in range(3)]
        ranges = [[_cell_range(fn, k, xs) for fn in fns] for k in range(3)]
        self.lo = np.stack([r[0] for r in ranges[0]], 1)
        self.hi = np.stack([r[1] for r in ranges[0]], 1)
        self.m = [np.stack([np.maximum(-r[0], r[1]) for r in rk], 1) for rk in ranges]


def _corners(A):
    return np.maximum(np.maximum(A[:-1, :-1], A[1:, :-1]), np.maximum(A[:-1, 1:], A[1:, 1:]))


def _report(A, cells, X: _AxisData, Y: _AxisData) -> SupNormReport:
    k = int(np.argmax(A))
    i, j = np.unravel_index(k, A.shape)
    gm = float(A[i, j])
    cert = max(float(np.max(cells)), gm)
    return SupNormReport(gm, cert, (float(X.x[i]), float(Y.x[j])),
                         (float(np.max(X.h)), float(np.max(Y.h))))


def _lift(rep: SupNormReport, n: int, rho: float) -> SupNormReport:
    arg = tuple(rep.argmax) + tuple(v for _ in range(n - 1) for v in (rho, 0.0))
    return SupNormReport(rep.grid_max, rep.certified_upper_bound, arg, rep.resolution)


def random_adversary(family: BumpFamily, s: float, rng: np.random.Generator):
    """Random bump perturbation of (f, g) scaled onto {||{F, G}|| <= s}.

    Half of the draws perturb the in-family witness for s, the other half
    perturb (f, g) itself.
    """
    K = family.K
    q = family.pair.params.q
    sigma = 10 ** rng.uniform(-3.0, -0.7)
    mask = rng.random(K - 3) < 0.3
    near_witness = rng.random() < 0.5
    if near_witness:
        cF, cG = family.witness_coefficients(s * rng.uniform(0.5, 1.5), q)
        cF[2] *= rng.uniform(0.8, 1.2)
    else:
        cF = np.zeros(K)
        cG = np.zeros(K)
        cF[0] = 1 + rng.uniform(-0.4, 0.1)
        cG[1] = 1 + rng.uniform(-0.4, 0.1)
        cF[2] = rng.uniform(0.0, 0.5)
        cG[2] = rng.uniform(0.0, 0.3)
    cF[3:] += sigma * rng.standard_normal(K - 3) * mask
    cG[3:] += sigma * rng.standard_normal(K - 3) * rng.permutation(mask)
    # scale to grid level s; the certified level is checked by ``assess``
    peak = family.bracket(cF, cG).grid_max
    if peak > s:
        if near_witness:
            cF = cF * (s / peak)
        else:
            scale = math.sqrt(s / peak)
            split = rng.uniform(0.7, 1.4)
            cF = cF * scale * split
            cG = cG * scale / split
    return cF, cG


@dataclass
class AdversaryOutcome:
    s: float
    level: float
    distance: float
    bracket_certified: float
    feasible: bool
    falsified: bool
    chain: LowerBoundReport | None
    contraction_ok: bool | None


def assess(family: BumpFamily, adv: AdversaryPair, s: float, delta: float = DEFAULT_DELTA,
           res: Resolution = DEFAULT_RESOLUTION, shrink: bool = True) -> AdversaryOutcome:
    pair = family.pair
    p = pair.params.p
    cert = adv.bracket.certified_upper_bound
    feasible = cert <= s
    # a pair with certified bracket c is an admissible competitor at level max(s, c)
    level = max(s, cert)
    lower = max(0.0, 0.5 - level / (2 * p))
    falsified = False
    if adv.distance < lower - FALSIFICATION_TOL:
        logger.error("FALSIFICATION EVENT at level %g: distance %.6g < %.6g", level, adv.distance,
                     lower)
        falsified = True
    chain = lower_bound_certificate(adv, pair, delta=delta, s=level)
    falsified |= chain.falsified
    contraction = None
    if shrink:
        sr = shrink_normalize(adv, pair, delta, res)
        contraction = sr.contraction_ok and all(sr.checks.values())
    return AdversaryOutcome(s, level, adv.distance, cert, feasible,
                            falsified, chain, contraction)


def optimize_adversary(family: BumpFamily, s: float, budget: int, seed: int,
                       start=None, fine: int | None = None):
    """Nelder-Mead on the dictionary coefficients minimizing ||F - f|| + ||G - g||.

    Infeasible points (certified bracket > s) are penalized.  Returns the best
    feasible coefficients seen and its objective value (``inf`` if none).
    """
    rng = np.random.default_rng(seed)
    K = family.K
    if start is None:
        start = family.witness_coefficients(s, family.bracket(family.base_f, family.base_g)
                                            .certified_upper_bound)
    x0 = np.concatenate(start)
    best = [math.inf, x0.copy()]

    def objective(x):
        cF, cG = x[:K], x[K:]
        br = family.bracket(cF, cG).certified_upper_bound
        dist = (family.distance(cF, family.base_f).certified_upper_bound
                + family.distance(cG, family.base_g).certified_upper_bound)
        if br <= s:
            if dist < best[0]:
                best[0] = dist
                best[1] = x.copy()
            return dist
        return dist + 1.0 + 10.0 * (br - s) / max(s, 1e-12)

    if budget > 0:
        dim = x0.size
        steps = 0.02 * rng.choice([-1.0, 1.0], size=dim)
        simplex = np.vstack([x0] + [x0 + steps[i] * np.eye(dim)[i] for i in range(dim)])
        minimize(objective, x0, method="Nelder-Mead",
                 options={"maxfev": budget, "initial_simplex": simplex,
                          "xatol": 1e-10, "fatol": 1e-12})
    else:
        objective(x0)
    return best[1][:K], best[1][K:], best[0]


def _env_threads() -> int:
    try:
        return max(1, int(os.environ.get("PBGAP_THREADS", "1")))
    except ValueError:
        return 1


def profile_row(pair: TheoremPair, s: float, family: BumpFamily, budget: int, seed: int,
                restarts: int = 1, res: Resolution = DEFAULT_RESOLUTION,
                fine: int = 2048) -> tuple[ProfilePoint, list[AdversaryOutcome]]:
    _check_s(pair, s)
    p, q = pair.params.p, pair.params.q
    lower = max(0.0, 0.5 - s / (2 * p))
    upper = 0.5 - s / (2 * q)
    wit = upper_bound_witness(pair, s, res)
    witness_distance = wit.alpha_grid + wit.beta_grid

    fg_cert = family.fg_certificate(res)
    seed_F, seed_G = family.witness_coefficients(s, fg_cert)
    candidates = [(seed_F, seed_G)]
    coarse_cert = family.bracket(family.base_f, family.base_g).certified_upper_bound
    start = family.witness_coefficients(s, coarse_cert)
    for r in range(restarts):
        cF, cG, val = optimize_adversary(family, s, budget, seed + 7919 * r, start=start)
        if math.isfinite(val):
            candidates.append((cF, cG))
    outcomes = []
    best = math.inf
    for cF, cG in candidates:
        adv = family.adversary(cF, cG, resolutions=(None, fine))
        out = assess(family, adv, s, res=res, shrink=False)
        outcomes.append(out)
        if out.feasible:
            best = min(best, out.distance)
    point = ProfilePoint(s, lower, upper, witness_distance, best, wit.bracket.grid_max,
                         any(o.falsified for o in outcomes))
    return point, outcomes


def profile_table(pair: TheoremPair, s_grid, adversary_budget: int = 200, seed: int = 0,
                  restarts: int = 1, res: Resolution = DEFAULT_RESOLUTION,
                  family: BumpFamily | None = None, threads: int | None = None) -> list[ProfilePoint]:
    """One row per s.  bestAdversary is made monotone: a pair feasible at s is feasible at s' > s."""
    s_grid = [float(s) for s in s_grid]
    for s in s_grid:
        _check_s(pair, s)
    if not s_grid:
        return []
    family = family or BumpFamily(pair)
    workers = threads or _env_threads()

    def run(item):
        i, s = item
        return profile_row(pair, s, family, adversary_budget, seed + 1000 * i, restarts, res)[0]

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            rows = list(ex.map(run, enumerate(s_grid)))
    else:
        rows = [run(item) for item in enumerate(s_grid)]
    order = np.argsort(s_grid, kind="stable")
    running = math.inf
    out = list(rows)
    for i in order:
        running = min(running, rows[i].best_adversary)
        r = rows[i]
        out[i] = ProfilePoint(r.s, r.lower_bound, r.upper_bound, r.witness_distance,
                              running, r.bracket_sup_at_witness, r.falsified)
    return out
