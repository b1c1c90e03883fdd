"""The explicit pair (f, g) with ||f|| = ||g|| = 1 and ||{f, g}|| = q.

Given 0 < p < q put l = 1/sqrt(q) and eps = 1/p - 1/q, so that q = 1/l^2 and
p = 1/(l^2 + eps).  On the plane rectangle (-e2, 2l + e1 + 2e2) x (-e2, l + 2e2)
the pair is f = u1(x) v1(y), g = u2(x) v2(y), where u1 climbs to 1 at
x = l + e1 with slope 1/(l + e3) and v2 climbs to 1 at y = l with slope
(l + e3)/l^2.  Because u2 is flat on supp u1 the bracket collapses to
u1'(x) v2'(y) v1(y), whose sup is exactly 1/l^2.  The full pair multiplies
by a radial bump h(|w_k|) in each remaining plane, equal to 1 on the circle
of radius rho.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import BadOrder, ParamMismatch
from .smoothfn import BumpSpec, SmoothFn1D, make_plateau_cutoff, make_ramp
from .symplectic import (
    DEFAULT_RESOLUTION,
    Bracket,
    ModelSpace,
    PlaneBracket,
    PlaneFn,
    Resolution,
    SupNormReport,
    TensorFn,
    bracket_finite_difference,
    bracket_sup,
    norm_sup,
)


@dataclass(frozen=True)
class ConstructionParams:
    p: float
    q: float
    n: int
    eps_prime: float
    l: float
    eps: float
    eps1: float
    eps2: float
    eps3: float
    rho1: float
    rho: float
    rho2: float

    @property
    def area(self) -> float:
        """Area l^2 + eps of the quadrilateral; its reciprocal is p."""
        return self.l ** 2 + self.eps

    @property
    def disc_area(self) -> float:
        return 2 * self.l ** 2 + 2 * self.eps

    @property
    def annulus_radius(self) -> float:
        return math.sqrt(self.eps_prime / math.pi)

    def eps2_residual(self) -> float:
        l, e1, e2 = self.l, self.eps1, self.eps2
        return (2 * l + e1 + 3 * e2) * (l + 3 * e2) - (2 * l * l + 2 * self.eps)

    def to_dict(self) -> dict:
        return asdict(self)


def solve_eps2(l: float, eps1: float, eps: float) -> float:
    """Positive root of (2l + e1 + 3x)(l + 3x) = 2l^2 + 2 eps.

    Expanding with l * e1 = eps gives 9x^2 + (9l + 3 e1) x - eps = 0; the
    root is taken in the cancellation-free form 2 eps / (B + sqrt(B^2 + 36 eps)).
    """
    B = 9 * l + 3 * eps1
    return 2 * eps / (B + math.sqrt(B * B + 36 * eps))


def derive_params(p: float, q: float, n: int = 2, eps_prime: float = 1.0) -> ConstructionParams:
    if not (0 < p < q):
        raise BadOrder(f"need 0 < p < q, got p={p}, q={q}")
    if n < 2:
        raise ValueError("need n >= 2")
    if not eps_prime > 0:
        raise ValueError("eps_prime must be positive")
    l = 1 / math.sqrt(q)
    eps = 1 / p - 1 / q
    eps1 = eps / l
    eps2 = solve_eps2(l, eps1, eps)
    eps3 = min(eps1, eps2) / 2
    rho = math.sqrt(eps_prime / (4 * math.pi))
    rho1 = rho / 2
    rho2 = min(2 * rho, 0.99 * math.sqrt(eps_prime / math.pi))
    return ConstructionParams(float(p), float(q), int(n), float(eps_prime), l, eps, eps1,
                              eps2, eps3, rho1, rho, rho2)


@dataclass(frozen=True)
class RectanglePair:
    """Plane pair f = u1 v1, g = u2 v2 solving the four-sided problem on [0, a] x [0, b]."""

    a: float
    b: float
    u1: SmoothFn1D
    v1: SmoothFn1D
    u2: SmoothFn1D
    v2: SmoothFn1D
    box: tuple[tuple[float, float], tuple[float, float]]

    @property
    def f(self) -> PlaneFn:
        return PlaneFn.product(self.u1, self.v1)

    @property
    def g(self) -> PlaneFn:
        return PlaneFn.product(self.u2, self.v2)

    @property
    def analytic_bracket_sup(self) -> float:
        return self.u1.rise_slope * self.v2.rise_slope

    def bracket(self) -> PlaneBracket:
        return PlaneBracket(self.f, self.g)


def rectangle_pair(a: float, b: float, slope_x: float, slope_y: float,
                   margin: float, fall: float | None = None) -> RectanglePair:
    """u1 rises over [0, a] with slope ``slope_x``; v2 rises over [0, b] with ``slope_y``.

    f = 0 on {0} x [0, b], f = 1 on {a} x [0, b], g = 0 on [0, a] x {0},
    g = 1 on [0, a] x {b}.  ``margin`` is the room left around the rectangle
    for the cutoffs; u1 falls back to 0 over ``fall`` (default a).
    """
    fall = a if fall is None else fall
    u1 = make_ramp(BumpSpec((0.0, a + fall), (a, a), target_deriv_sup=slope_x))
    v1 = make_plateau_cutoff((-margin, b + margin), (0.0, b))
    u2 = make_plateau_cutoff((-margin, a + fall + margin), (0.0, a + fall))
    v2 = make_ramp(BumpSpec((0.0, b + 2 * margin), (b, b + margin), rise_target=slope_y))
    box = ((-margin, a + fall + margin), (-margin, b + 2 * margin))
    return RectanglePair(a, b, u1, v1, u2, v2, box)


def build_claim_pair(params: ConstructionParams) -> RectanglePair:
    l, e1, e2, e3 = params.l, params.eps1, params.eps2, params.eps3
    return rectangle_pair(l + e1, l, 1 / (l + e3), (l + e3) / l ** 2, e2, fall=l + e2)


@dataclass(frozen=True)
class TheoremPair:
    f: TensorFn
    g: TensorFn
    params: ConstructionParams
    claim: RectanglePair
    radial: SmoothFn1D
    space: ModelSpace

    @property
    def quadrilateral(self) -> dict:
        """Sides of the rectangle [0, l + e1] x [0, l] in counterclockwise order a1..a4."""
        a, b = self.claim.a, self.claim.b
        return {"a1": ((0.0, 0.0), (0.0, b)), "a2": ((0.0, 0.0), (a, 0.0)),
                "a3": ((a, 0.0), (a, b)), "a4": ((0.0, b), (a, b))}

    def side_points(self, side: str, count: int = 256, angles: int = 8,
                    rng: np.random.Generator | None = None) -> np.ndarray:
        """Points of side x (S^1_rho)^(n-1) in full model coordinates."""
        (x0, y0), (x1, y1) = self.quadrilateral[side]
        t = np.linspace(0.0, 1.0, count)
        plane = np.stack([x0 + t * (x1 - x0), y0 + t * (y1 - y0)], axis=1)
        # keep the fixed coordinate bit-identical to the ramp knots
        if x0 == x1:
            plane[:, 0] = x0
        if y0 == y1:
            plane[:, 1] = y0
        k = self.params.n - 1
        if rng is None:
            th = np.linspace(0.0, 2 * np.pi, angles, endpoint=False)
            thetas = np.stack(np.meshgrid(*([th] * k), indexing="ij"), -1).reshape(-1, k)
        else:
            thetas = rng.uniform(0, 2 * np.pi, size=(angles, k))
        rho = self.params.rho
        pts = []
        for theta in thetas:
            w = np.concatenate([[rho * np.cos(a), rho * np.sin(a)] for a in theta])
            pts.append(np.hstack([plane, np.broadcast_to(w, (count, 2 * k))]))
        out = np.concatenate(pts)
        # |w| must equal rho exactly for the plateau test; rescale each annulus pair
        for j in range(k):
            r = np.hypot(out[:, 2 + 2 * j], out[:, 3 + 2 * j])
            out[:, 2 + 2 * j: 4 + 2 * j] *= (rho / r)[:, None]
        return out

    def cutoff(self) -> TensorFn:
        """h with h = 1 on supp f and supp g (plane cutoff times radial cutoff)."""
        c = self.claim
        xs = [c.u1.support, c.u2.support]
        ys = [c.v1.support, c.v2.support]
        (bx0, bx1), (by0, by1) = self.space.plane_box
        hx = make_plateau_cutoff((bx0, bx1), (min(s[0] for s in xs), max(s[1] for s in xs)))
        hy = make_plateau_cutoff((by0, by1), (min(s[0] for s in ys), max(s[1] for s in ys)))
        R = self.space.annulus_radius
        hr = make_plateau_cutoff((-R, R), (-self.params.rho2, self.params.rho2))
        return TensorFn.product(PlaneFn.product(hx, hy), hr, self.params.n)

    def bracket(self) -> Bracket:
        return Bracket(self.f, self.g)

    def to_dict(self) -> dict:
        c = self.claim
        return {
            "params": self.params.to_dict(),
            "space": self.space.to_dict(),
            "factors": {"u1": c.u1.to_dict(), "v1": c.v1.to_dict(),
                        "u2": c.u2.to_dict(), "v2": c.v2.to_dict(),
                        "h1": self.radial.to_dict()},
            "f": self.f.to_dict(),
            "g": self.g.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TheoremPair":
        pr = data["params"]
        return build_theorem_pair(derive_params(pr["p"], pr["q"], pr["n"], pr["eps_prime"]))


def build_theorem_pair(params: ConstructionParams) -> TheoremPair:
    claim = build_claim_pair(params)
    radial = make_plateau_cutoff((params.rho1, params.rho2), (params.rho, params.rho))
    n = params.n
    f = TensorFn.product(claim.f, radial, n)
    g = TensorFn.product(claim.g, radial, n)
    space = ModelSpace(n, claim.box, params.annulus_radius)
    return TheoremPair(f, g, params, claim, radial, space)


def corollary_q(C: float) -> float:
    return 1.0 / (64.0 * C * C)


@dataclass(frozen=True)
class CorollaryReport:
    C: float
    q: float
    bracket: SupNormReport
    rho_zero: float
    rho_zero_rescaled: float

    def to_dict(self) -> dict:
        return {"C": self.C, "q": self.q, "bracket": self.bracket.to_dict(),
                "rho_fg_0": self.rho_zero, "rho_f1g1_0": self.rho_zero_rescaled}


def corollary_rescale(pair: TheoremPair, C: float,
                      res: Resolution = DEFAULT_RESOLUTION):
    """f1 = 8C f, g1 = 8C g for a pair built with q = 1/(64 C^2)."""
    if not C > 0:
        raise ValueError("C must be positive")
    q = corollary_q(C)
    if abs(pair.params.q - q) > 1e-9 * q:
        raise ParamMismatch(f"pair has q={pair.params.q}, rescaling by C={C} needs q={q}")
    f1 = pair.f * (8 * C)
    g1 = pair.g * (8 * C)
    rep = bracket_sup(f1, g1, pair.space, res)
    # rho_{f,g}(0) = 1/2 from both sides of the profile estimate at s = 0
    return f1, g1, CorollaryReport(C, q, rep, 0.5, 8 * C * 0.5)


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


def verify_pair(pair: TheoremPair, res: Resolution = DEFAULT_RESOLUTION,
                seed: int = 0, samples: int = 1000, tol: float = 0.01) -> tuple[list[Check], dict]:
    """Run the invariant suite on a theorem pair; returns checks and the measured numbers."""
    rng = np.random.default_rng(seed)
    q = pair.params.q
    checks: list[Check] = []
    br = bracket_sup(pair.f, pair.g, pair.space, res)
    checks.append(Check("bracket sup = q", abs(br.grid_max - q) <= tol * q,
                        f"gridMax={br.grid_max:.6g}, q={q:.6g}"))
    checks.append(Check("certified bracket bound", br.certified_upper_bound <= (1 + 5 * tol) * q,
                        f"cert={br.certified_upper_bound:.6g}"))
    nf = norm_sup(pair.f, pair.space, res)
    ng = norm_sup(pair.g, pair.space, res)
    checks.append(Check("||f|| = 1", nf.grid_max == 1.0, f"{nf.grid_max!r}"))
    checks.append(Check("||g|| = 1", ng.grid_max == 1.0, f"{ng.grid_max!r}"))

    c = pair.claim
    xs = np.linspace(*pair.space.plane_box[0], 513)
    ys = np.linspace(*pair.space.plane_box[1], 513)
    checks.append(Check("f, g >= 0", bool(c.f.grid(xs, ys).min() >= 0 and c.g.grid(xs, ys).min() >= 0)))

    side_vals = {
        "f=0 on a1": (pair.f, "a1", 0.0), "f=1 on a3": (pair.f, "a3", 1.0),
        "g=0 on a2": (pair.g, "a2", 0.0), "g=1 on a4": (pair.g, "a4", 1.0),
    }
    for name, (fn, side, target) in side_vals.items():
        pts = pair.side_points(side, count=250, angles=4, rng=rng)
        checks.append(Check(name, bool(np.all(fn.value(pts) == target))))
        plane_pts = pts[:, :2]
        P = c.f if fn is pair.f else c.g
        checks.append(Check(name.replace("f", "f^").replace("g", "g^") + " (plane)",
                            bool(np.all(P.value(plane_pts[:, 0], plane_pts[:, 1]) == target))))

    pts = pair.space.sample(rng, samples, margin=1e-3)
    bracket = pair.bracket()
    fac = bracket(pts)
    gen = bracket.generic(pts)
    scale = max(1.0, np.abs(gen).max())
    checks.append(Check("factorization identity", bool(np.max(np.abs(fac - gen)) <= 1e-10 * scale)))
    fd = np.array([bracket_finite_difference(pair.f, pair.g, pt, 1e-5) for pt in pts[:200]])
    checks.append(Check("closed form vs finite differences",
                        bool(np.max(np.abs(fd - fac[:200])) <= 1e-4 * scale),
                        f"max abs err {np.max(np.abs(fd - fac[:200])):.3g}"))
    numbers = {"bracket": br.to_dict(), "norm_f": nf.to_dict(), "norm_g": ng.to_dict()}
    return checks, numbers
