"""Functions on the model space R^2n, their Poisson brackets and certified sup-norms.

Coordinates are ordered (x, y, a_1, b_1, ..., a_{n-1}, b_{n-1}): one distinguished
plane z = (x, y) and n - 1 annulus planes w_k = (a_k, b_k), with the standard
form dx^dy + sum da_k^db_k.

A ``TensorFn`` is a finite sum of products P(z) * prod_k h(|w_k|) where P is a
``PlaneFn`` (a linear combination of separable products u(x) v(y)) and h is a
radial profile shared by all annulus planes.  Two radial functions of the same
plane Poisson-commute, so

    {P h(|w|)..., Q k(|w|)...} = {P, Q}(z) * prod_k h(|w_k|) k(|w_k|)

and every bracket reduces to plane brackets weighted by radial products.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainEdge, ResolutionTooCoarse, StructureMismatch
from .smoothfn import SmoothFn1D

# ---------------------------------------------------------------------------
# plane functions


def _live_pieces(factors):
    """Pieces (lo, hi, cap) where a product of (fn, order) factors can be nonzero."""
    live = [(-math.inf, math.inf, 1.0)]
    for fn, order in factors:
        nxt = []
        for a, b, ca in live:
            for c, d, cc in fn.active_intervals(order):
                lo, hi = max(a, c), min(b, d)
                if lo < hi:
                    nxt.append((lo, hi, ca * cc))
        if not nxt:
            return []
        live = nxt
    return live


def _factors_vanish(factors) -> bool:
    """True when a product of (fn, derivative order) factors is identically zero."""
    return not _live_pieces(factors)


def _factors_cap(factors) -> float:
    return max((c for _, _, c in _live_pieces(factors)), default=0.0)


def _factors_dcap(factors) -> float:
    """Bound on the derivative of a product of factors (product rule, pruned)."""
    total = 0.0
    for m, (fn, order) in enumerate(factors):
        bumped = list(factors)
        bumped[m] = (fn, order + 1)
        total += _factors_cap(bumped)
    return total


def _eval_factors(factors, x):
    out = np.ones_like(x)
    for fn, order in factors:
        out = out * fn.evaluate(x, order)
    return out


def _cell_range(fn: SmoothFn1D, order: int, xs, sub: int = 8):
    """Enclosure [lo, hi] of fn^(order) on every cell [xs[i], xs[i+1]].

    Cells are sampled at ``sub`` + 1 points.  Where the next derivative is
    active the gaps are covered by its piece cap; elsewhere fn^(order) is
    constant on the cell and the samples are exact.  The result is clipped
    to the caps of the pieces the cell meets.
    """
    xs = np.asarray(xs, float)
    a, b = xs[:-1], xs[1:]
    hs = (b - a) / sub
    t = np.linspace(0.0, 1.0, sub + 1)
    vals = fn.evaluate(a[:, None] + (b - a)[:, None] * t[None, :], order)
    lo, hi = vals.min(axis=1), vals.max(axis=1)
    corr = np.zeros_like(a)
    for p, q, cap in fn.active_intervals(order + 1):
        hit = (a < q) & (b > p)
        corr = np.where(hit, np.maximum(corr, cap), corr)
    corr = corr * hs / 2
    # the derivative is bounded by the cap of whichever pieces the cell meets
    cap = np.zeros_like(a)
    for p, q, c in fn.active_intervals(order):
        cap = np.where((a < q) & (b > p), np.maximum(cap, c), cap)
    lo = np.maximum(lo - corr, 0.0 if order == 0 else -cap)
    hi = np.minimum(hi + corr, cap)
    return lo, hi


def _product_range(factors, xs, sub: int = 8):
    lo = hi = None
    for fn, order in factors:
        a, b = _cell_range(fn, order, xs, sub)
        if lo is None:
            lo, hi = a, b
        else:
            c = np.stack([lo * a, lo * b, hi * a, hi * b])
            lo, hi = c.min(axis=0), c.max(axis=0)
    return lo, hi


def interval_sup(terms, xs, ys, chunk_cells: int = 1 << 22) -> float:
    """Interval-arithmetic bound of sup |sum c A(x) C(y)| over the grid cells.

    ``terms`` holds (c, x_factors, y_factors) with factors given as
    (fn, derivative order) pairs.
    """
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    if len(xs) < 2 or len(ys) < 2 or not terms:
        return 0.0
    ranges = []
    for c, xf, yf in terms:
        alo, ahi = _product_range(xf, xs)
        clo, chi = _product_range(yf, ys)
        if c < 0:
            alo, ahi = c * ahi, c * alo
        else:
            alo, ahi = c * alo, c * ahi
        ranges.append((alo, ahi, clo, chi))
    rows = max(1, chunk_cells // (len(ys) - 1))
    best = 0.0
    for start in range(0, len(xs) - 1, rows):
        sl = slice(start, start + rows)
        lo = 0.0
        hi = 0.0
        for alo, ahi, clo, chi in ranges:
            prods = [np.multiply.outer(u[sl], v) for u in (alo, ahi) for v in (clo, chi)]
            lo = lo + np.minimum(np.minimum(prods[0], prods[1]), np.minimum(prods[2], prods[3]))
            hi = hi + np.maximum(np.maximum(prods[0], prods[1]), np.maximum(prods[2], prods[3]))
        best = max(best, float(np.max(np.maximum(hi, -lo))))
    return best


@dataclass(frozen=True)
class PlaneFn:
    """sum_i c_i u_i(x) v_i(y)."""

    terms: tuple[tuple[float, SmoothFn1D, SmoothFn1D], ...]

    @classmethod
    def product(cls, fx: SmoothFn1D, fy: SmoothFn1D, coef: float = 1.0) -> "PlaneFn":
        return cls(((float(coef), fx, fy),))

    @classmethod
    def zero(cls) -> "PlaneFn":
        return cls(())

    def _merged(self, terms) -> "PlaneFn":
        acc: dict = {}
        for c, fx, fy in terms:
            acc[(fx, fy)] = acc.get((fx, fy), 0.0) + c
        return PlaneFn(tuple((c, fx, fy) for (fx, fy), c in acc.items() if c != 0.0))

    def __add__(self, other: "PlaneFn") -> "PlaneFn":
        return self._merged(self.terms + other.terms)

    def __mul__(self, scalar: float) -> "PlaneFn":
        return self._merged(tuple((c * scalar, fx, fy) for c, fx, fy in self.terms))

    __rmul__ = __mul__

    def __neg__(self) -> "PlaneFn":
        return self * -1.0

    def __sub__(self, other: "PlaneFn") -> "PlaneFn":
        return self + (-other)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def partial(self, x, y, ox: int = 0, oy: int = 0):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for c, fx, fy in self.terms:
            out = out + c * fx.evaluate(x, ox) * fy.evaluate(y, oy)
        return out

    def value(self, x, y):
        return self.partial(x, y)

    def grid(self, xs, ys, ox: int = 0, oy: int = 0):
        """Values of the (ox, oy) partial on the tensor grid xs x ys."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if not self.terms:
            return np.zeros((xs.size, ys.size))
        X = np.stack([c * fx.evaluate(xs, ox) for c, fx, _ in self.terms], axis=1)
        Y = np.stack([fy.evaluate(ys, oy) for _, _, fy in self.terms], axis=1)
        return X @ Y.T

    def cap(self, ox: int = 0, oy: int = 0) -> float:
        return sum(abs(c) * fx.cap(ox) * fy.cap(oy) for c, fx, fy in self.terms)

    def interval_terms(self):
        return [(c, ((fx, 0),), ((fy, 0),)) for c, fx, fy in self.terms]

    def support_box(self):
        if not self.terms:
            return None
        xs = [fx.support for _, fx, _ in self.terms]
        ys = [fy.support for _, _, fy in self.terms]
        return ((min(a for a, _ in xs), max(b for _, b in xs)),
                (min(a for a, _ in ys), max(b for _, b in ys)))

    def to_dict(self) -> dict:
        return {"terms": [{"coef": c, "x": fx.to_dict(), "y": fy.to_dict()}
                          for c, fx, fy in self.terms]}

    @classmethod
    def from_dict(cls, data: dict) -> "PlaneFn":
        return cls(tuple((t["coef"], SmoothFn1D.from_dict(t["x"]), SmoothFn1D.from_dict(t["y"]))
                         for t in data["terms"]))


@dataclass(frozen=True)
class PlaneBracket:
    """{P, Q} on the plane, with structural zero-pruning for certification.

    The separable terms of the bracket are

        + c d (u' e)(x) (v k')(y)   and   - c d (u e')(x) (v' k)(y)

    for P = sum c u(x) v(y), Q = sum d e(x) k(y).  A term whose factors have
    disjoint active sets (e.g. u' against a function flat on supp u) is dropped.
    """

    P: PlaneFn
    Q: PlaneFn
    weight: float = 1.0
    terms: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        terms = []
        for c, u, v in self.P.terms:
            for d, e, k in self.Q.terms:
                coef = self.weight * c * d
                if coef == 0.0:
                    continue
                for sign, xf, yf in ((1.0, ((u, 1), (e, 0)), ((v, 0), (k, 1))),
                                     (-1.0, ((u, 0), (e, 1)), ((v, 1), (k, 0)))):
                    if _factors_vanish(xf) or _factors_vanish(yf):
                        continue
                    terms.append((sign * coef, xf, yf))
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def value(self, x, y):
        if self.is_zero:
            return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
        P, Q = self.P, self.Q
        return self.weight * (P.partial(x, y, 1, 0) * Q.partial(x, y, 0, 1)
                              - P.partial(x, y, 0, 1) * Q.partial(x, y, 1, 0))

    def term_value(self, x, y):
        """Same function evaluated term by term (independent of ``value``)."""
        out = np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
        for c, xf, yf in self.terms:
            out = out + c * _eval_factors(xf, np.asarray(x, float)) * _eval_factors(yf, np.asarray(y, float))
        return out

    def grid(self, xs, ys):
        if self.is_zero:
            return np.zeros((np.size(xs), np.size(ys)))
        P, Q = self.P, self.Q
        return self.weight * (P.grid(xs, ys, 1, 0) * Q.grid(xs, ys, 0, 1)
                              - P.grid(xs, ys, 0, 1) * Q.grid(xs, ys, 1, 0))

    def interval_terms(self):
        return list(self.terms)

    def cap(self) -> float:
        return sum(abs(c) * _factors_cap(xf) * _factors_cap(yf) for c, xf, yf in self.terms)

    def lipschitz(self) -> tuple[float, float]:
        lx = sum(abs(c) * _factors_dcap(xf) * _factors_cap(yf) for c, xf, yf in self.terms)
        ly = sum(abs(c) * _factors_cap(xf) * _factors_dcap(yf) for c, xf, yf in self.terms)
        return lx, ly


# ---------------------------------------------------------------------------
# model space and tensor functions


@dataclass(frozen=True)
class ModelSpace:
    """Plane rectangle times n - 1 discs of radius ``annulus_radius``.

    The plane rectangle stands in for the disc B^2(2l^2 + 2eps) of the same area.
    """

    n: int
    plane_box: tuple[tuple[float, float], tuple[float, float]]
    annulus_radius: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("the model space needs n >= 2")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def lows(self) -> np.ndarray:
        (x0, _), (y0, _) = self.plane_box
        return np.array([x0, y0] + [-self.annulus_radius] * (2 * self.n - 2))

    @property
    def highs(self) -> np.ndarray:
        (_, x1), (_, y1) = self.plane_box
        return np.array([x1, y1] + [self.annulus_radius] * (2 * self.n - 2))

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        ok = np.all((pts >= self.lows) & (pts <= self.highs), axis=-1)
        for k in range(self.n - 1):
            r = np.hypot(pts[..., 2 + 2 * k], pts[..., 3 + 2 * k])
            ok &= r < self.annulus_radius
        return ok

    def sample(self, rng: np.random.Generator, count: int, margin: float = 0.0) -> np.ndarray:
        """Uniform points of the domain (discs by rejection), kept ``margin`` off the edges."""
        lows = self.lows + margin
        highs = self.highs - margin
        out = []
        need = count
        while need > 0:
            pts = rng.uniform(lows, highs, size=(2 * need + 8, self.dim))
            keep = np.ones(len(pts), bool)
            for k in range(self.n - 1):
                r = np.hypot(pts[:, 2 + 2 * k], pts[:, 3 + 2 * k])
                keep &= r < self.annulus_radius - margin
            pts = pts[keep][:need]
            out.append(pts)
            need -= len(pts)
        return np.concatenate(out)

    def to_dict(self) -> dict:
        return {"n": self.n, "plane_box": [list(b) for b in self.plane_box],
                "annulus_radius": self.annulus_radius}


def _radii(pts, n):
    return [np.hypot(pts[..., 2 + 2 * k], pts[..., 3 + 2 * k]) for k in range(n - 1)]


def _radial_eval(h, r, order=0):
    if h is None:
        return np.ones_like(r) if order == 0 else np.zeros_like(r)
    return h.evaluate(r, order)


@dataclass(frozen=True)
class TensorFn:
    """sum_j P_j(z) * prod_k h_j(|w_k|) on R^2n (``None`` radial means constant 1)."""

    n: int
    parts: tuple[tuple[PlaneFn, SmoothFn1D | None], ...]

    @classmethod
    def product(cls, plane: PlaneFn, radial: SmoothFn1D | None, n: int) -> "TensorFn":
        return cls(n, ((plane, radial),))._normalized()

    def _normalized(self) -> "TensorFn":
        acc: dict = {}
        order = []
        for plane, radial in self.parts:
            if radial not in acc:
                acc[radial] = PlaneFn.zero()
                order.append(radial)
            acc[radial] = acc[radial] + plane
        return TensorFn(self.n, tuple((acc[h], h) for h in order if not acc[h].is_zero))

    def groups(self) -> dict:
        return {h: plane for plane, h in self.parts}

    def _check(self, other: "TensorFn"):
        if other.n != self.n:
            raise StructureMismatch(f"dimension mismatch: n={self.n} vs n={other.n}")

    def __add__(self, other: "TensorFn") -> "TensorFn":
        self._check(other)
        return TensorFn(self.n, self.parts + other.parts)._normalized()

    def __mul__(self, scalar: float) -> "TensorFn":
        return TensorFn(self.n, tuple((p * scalar, h) for p, h in self.parts))._normalized()

    __rmul__ = __mul__

    def __neg__(self) -> "TensorFn":
        return self * -1.0

    def __sub__(self, other: "TensorFn") -> "TensorFn":
        return self + (-other)

    def value(self, pts):
        pts = np.asarray(pts, dtype=float)
        rs = _radii(pts, self.n)
        out = np.zeros(pts.shape[:-1])
        for plane, h in self.parts:
            w = np.ones_like(out)
            for r in rs:
                w = w * _radial_eval(h, r)
            out = out + plane.value(pts[..., 0], pts[..., 1]) * w
        return out

    __call__ = value

    def grad(self, pts):
        pts = np.asarray(pts, dtype=float)
        rs = _radii(pts, self.n)
        out = np.zeros(pts.shape)
        x, y = pts[..., 0], pts[..., 1]
        for plane, h in self.parts:
            hv = [_radial_eval(h, r) for r in rs]
            hd = [_radial_eval(h, r, 1) for r in rs]
            W = np.ones(pts.shape[:-1])
            for v in hv:
                W = W * v
            out[..., 0] += plane.partial(x, y, 1, 0) * W
            out[..., 1] += plane.partial(x, y, 0, 1) * W
            if h is None:
                continue
            pv = plane.value(x, y)
            for k, r in enumerate(rs):
                others = np.ones_like(W)
                for j, v in enumerate(hv):
                    if j != k:
                        others = others * v
                with np.errstate(invalid="ignore", divide="ignore"):
                    inv = np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0), 0.0)
                common = pv * hd[k] * others * inv
                out[..., 2 + 2 * k] += common * pts[..., 2 + 2 * k]
                out[..., 3 + 2 * k] += common * pts[..., 3 + 2 * k]
        return out

    def to_dict(self) -> dict:
        return {"n": self.n, "parts": [{"plane": p.to_dict(),
                                        "radial": None if h is None else h.to_dict()}
                                       for p, h in self.parts]}

    @classmethod
    def from_dict(cls, data: dict) -> "TensorFn":
        parts = tuple((PlaneFn.from_dict(p["plane"]),
                       None if p["radial"] is None else SmoothFn1D.from_dict(p["radial"]))
                      for p in data["parts"])
        return cls(data["n"], parts)._normalized()


def poisson_bracket_from_grads(dF, dG):
    """sum_i dF/dx_i dG/dy_i - dF/dy_i dG/dx_i for gradients in (x1, y1, x2, y2, ...) order."""
    dF = np.asarray(dF)
    dG = np.asarray(dG)
    return (dF[..., 0::2] * dG[..., 1::2] - dF[..., 1::2] * dG[..., 0::2]).sum(axis=-1)


@dataclass(frozen=True)
class Bracket:
    """Closed-form {F, G}: plane brackets grouped by their radial weight."""

    F: TensorFn
    G: TensorFn
    groups: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        groups = []
        for P, hF in self.F.parts:
            for Q, hG in self.G.parts:
                pb = PlaneBracket(P, Q)
                if not pb.is_zero:
                    groups.append((pb, hF, hG))
        object.__setattr__(self, "groups", tuple(groups))

    @property
    def n(self) -> int:
        return self.F.n

    def __call__(self, pts):
        """Factorized evaluation: sum_g {P, Q}(z) prod_k hF(|w_k|) hG(|w_k|)."""
        pts = np.asarray(pts, dtype=float)
        rs = _radii(pts, self.n)
        out = np.zeros(pts.shape[:-1])
        for pb, hF, hG in self.groups:
            w = np.ones_like(out)
            for r in rs:
                w = w * _radial_eval(hF, r) * _radial_eval(hG, r)
            out = out + pb.value(pts[..., 0], pts[..., 1]) * w
        return out

    def generic(self, pts):
        """Coordinate formula from the analytic gradients (no factorization)."""
        return poisson_bracket_from_grads(self.F.grad(pts), self.G.grad(pts))

    @property
    def is_zero(self) -> bool:
        return not self.groups


def bracket_closed_form(F: TensorFn, G: TensorFn, simplified: bool = True) -> Bracket:
    """Closed-form Poisson bracket.

    With ``simplified`` the pair must be single tensor products with the same
    annulus profile, so that {F, G} = {P, Q}(z) prod h^2(|w_k|).
    """
    if F.n != G.n:
        raise StructureMismatch("pairs live on different model spaces")
    if simplified:
        if len(F.parts) != 1 or len(G.parts) != 1 or F.parts[0][1] != G.parts[0][1]:
            raise StructureMismatch("factorized bracket needs one shared annulus profile")
    return Bracket(F, G)


def bracket_finite_difference(F: Callable, G: Callable, pt, step: float,
                              lows=None, highs=None) -> float:
    """Central-difference Poisson bracket at a single point."""
    if not step > 0:
        raise ValueError("step must be positive")
    pt = np.asarray(pt, dtype=float)
    d = pt.size
    if d % 2:
        raise ValueError("points must have even dimension")
    if lows is not None and np.any(pt - step < np.asarray(lows)):
        raise DomainEdge(f"{pt} is within {step} of the lower boundary")
    if highs is not None and np.any(pt + step > np.asarray(highs)):
        raise DomainEdge(f"{pt} is within {step} of the upper boundary")
    stencil = np.concatenate([pt + step * np.eye(d), pt - step * np.eye(d)])
    fv = np.asarray(F(stencil), dtype=float)
    gv = np.asarray(G(stencil), dtype=float)
    dF = (fv[:d] - fv[d:]) / (2 * step)
    dG = (gv[:d] - gv[d:]) / (2 * step)
    return float(poisson_bracket_from_grads(dF, dG))


# ---------------------------------------------------------------------------
# certified sup-norms


@dataclass(frozen=True)
class SupNormReport:
    grid_max: float
    certified_upper_bound: float
    argmax: tuple
    resolution: tuple

    def to_dict(self) -> dict:
        return {"gridMax": self.grid_max, "certifiedUpperBound": self.certified_upper_bound,
                "argmax": [float(a) for a in self.argmax],
                "resolution": [float(h) for h in self.resolution]}

    @classmethod
    def from_dict(cls, data: dict) -> "SupNormReport":
        return cls(data["gridMax"], data["certifiedUpperBound"], tuple(data["argmax"]),
                   tuple(data["resolution"]))

    def scaled(self, factor: float) -> "SupNormReport":
        f = abs(factor)
        return SupNormReport(self.grid_max * f, self.certified_upper_bound * f,
                             self.argmax, self.resolution)


def _axes(lows, highs, resolution, extra):
    axes = []
    for i, (lo, hi) in enumerate(zip(lows, highs)):
        pts = np.linspace(lo, hi, int(resolution[i])) if hi > lo else np.array([lo])
        if extra is not None and extra[i] is not None and len(extra[i]):
            ex = np.asarray(extra[i], dtype=float)
            pts = np.union1d(pts, ex[(ex >= lo) & (ex <= hi)])
        axes.append(pts)
    return axes


def sup_norm(expr: Callable, lows: Sequence[float], highs: Sequence[float],
             lipschitz, resolution, *, on_grid: bool = False, extra=None,
             chunk_points: int = 1 << 22, strict: bool = True) -> SupNormReport:
    """Grid maximum of |expr| over a box plus a Lipschitz certificate.

    ``lipschitz`` is either a scalar bound on |grad expr| (certificate
    gridMax + L * diam / 2) or per-axis bounds on |d expr / d x_i|
    (certificate gridMax + sum L_i h_i / 2).  ``resolution`` is a point count
    per axis (an int applies to every axis).  With ``on_grid`` the expression
    receives the list of axis arrays and returns the tensor of values;
    otherwise it receives an (N, d) array of points.  ``extra`` optionally
    adds points per axis (plateau knots, say); steps are then the largest gap.
    """
    lows = np.asarray(lows, dtype=float)
    highs = np.asarray(highs, dtype=float)
    d = lows.size
    if np.ndim(resolution) == 0:
        resolution = [int(resolution)] * d
    axes = _axes(lows, highs, resolution, extra)
    steps = np.array([np.max(np.diff(a)) if a.size > 1 else 0.0 for a in axes])

    inner = int(np.prod([a.size for a in axes[1:]])) if d > 1 else 1
    rows = max(1, chunk_points // max(inner, 1))
    best = -1.0
    best_idx = None
    for start in range(0, axes[0].size, rows):
        sub = [axes[0][start:start + rows]] + axes[1:]
        if on_grid:
            vals = np.abs(np.asarray(expr(sub), dtype=float))
        else:
            mesh = np.meshgrid(*sub, indexing="ij")
            pts = np.stack([m.ravel() for m in mesh], axis=-1)
            vals = np.abs(np.asarray(expr(pts), dtype=float)).reshape(mesh[0].shape)
        k = int(np.argmax(vals))
        if vals.flat[k] > best:
            best = float(vals.flat[k])
            idx = np.unravel_index(k, vals.shape)
            best_idx = (idx[0] + start,) + tuple(idx[1:])
    argmax = tuple(float(axes[i][best_idx[i]]) for i in range(d))

    if np.ndim(lipschitz) == 0:
        slack = float(lipschitz) * float(np.sqrt(np.sum(steps ** 2))) / 2.0
    else:
        slack = float(np.dot(np.asarray(lipschitz, dtype=float), steps)) / 2.0
    cert = best + slack
    if strict and best > 0 and cert / best > 1.5:
        raise ResolutionTooCoarse(f"certified bound {cert:.6g} vs grid max {best:.6g}")
    return SupNormReport(best, cert, argmax, tuple(float(s) for s in steps))


def _plane_sup(grid_fn, lip, box, resolution, extra=None, refine: float | None = None,
               max_points: int = 1 << 25, terms=None) -> SupNormReport:
    """Plane sup-norm certified by the tighter of a Lipschitz and an interval bound.

    ``terms`` (separable form of the same function) enables the interval
    bound.  With ``refine`` the axis contributing most Lipschitz slack is
    doubled until the certificate is within ``refine`` * gridMax.
    """
    (x0, x1), (y0, y1) = box
    res = list(resolution) if np.ndim(resolution) else [int(resolution)] * 2
    while True:
        rep = sup_norm(grid_fn, (x0, y0), (x1, y1), lip, res, on_grid=True,
                       extra=extra, strict=False)
        if terms is not None:
            axes = _axes((x0, y0), (x1, y1), res, extra)
            bound = interval_sup(terms, axes[0], axes[1])
            if bound < rep.certified_upper_bound:
                rep = SupNormReport(rep.grid_max, max(bound, rep.grid_max), rep.argmax,
                                    rep.resolution)
        slack = rep.certified_upper_bound - rep.grid_max
        if refine is None or slack <= refine * rep.grid_max:
            return rep
        contrib = [lip[0] * rep.resolution[0], lip[1] * rep.resolution[1]]
        i = int(np.argmax(contrib))
        if 2 * res[0] * res[1] > max_points:
            return rep
        res[i] = 2 * res[i] - 1


def _plane_knots(planes) -> tuple[list, list]:
    xs, ys = [], []
    for P in planes:
        for _, fx, fy in P.terms:
            xs.extend(fx.plateau)
            ys.extend(fy.plateau)
    return xs, ys


def _radial_product_sup(hs, radius, resolution) -> SupNormReport:
    hs = [h for h in hs if h is not None]
    if not hs:
        return SupNormReport(1.0, 1.0, (0.0,), (0.0,))

    def fn(axes):
        out = np.ones_like(axes[0])
        for h in hs:
            out = out * h(axes[0])
        return out

    lip = sum(h.deriv_cap for h in hs)  # each factor bounded by 1
    knots = [[0.0] + [c for h in hs for c in h.plateau if c >= 0]]
    rep = sup_norm(fn, (0.0,), (radius,), [lip], [resolution], on_grid=True,
                   extra=knots, strict=False)
    return SupNormReport(rep.grid_max, min(rep.certified_upper_bound, 1.0),
                         rep.argmax, rep.resolution)


def _lift_argmax(plane_arg, r, n):
    return tuple(plane_arg) + tuple(v for _ in range(n - 1) for v in (r, 0.0))


def _combine(plane_rep: SupNormReport, rad_rep: SupNormReport, n: int) -> SupNormReport:
    k = n - 1
    return SupNormReport(plane_rep.grid_max * rad_rep.grid_max ** k,
                         plane_rep.certified_upper_bound * rad_rep.certified_upper_bound ** k,
                         _lift_argmax(plane_rep.argmax, rad_rep.argmax[0], n),
                         plane_rep.resolution + rad_rep.resolution * k)


@dataclass(frozen=True)
class Resolution:
    """Grid sizes for tensor sup-norms."""

    plane: int | tuple[int, int] = 4096
    radial: int = 512
    refine: float | None = None
    reduced_plane: int = 256
    reduced_radial: int = 24


DEFAULT_RESOLUTION = Resolution()


def _reduced_sup(items, n, space: ModelSpace, res: Resolution) -> SupNormReport:
    """Sup over (x, y, r_1, ..., r_{n-1}) of sum_g M_g(x, y) prod_k R_g(r_k).

    ``items`` holds (grid_fn, cap, (capx, capy), radial_fns) with R_g the
    product of ``radial_fns`` (each valued in [0, 1]).
    """
    k = n - 1
    box = space.plane_box
    lows = [box[0][0], box[1][0]] + [0.0] * k
    highs = [box[0][1], box[1][1]] + [space.annulus_radius] * k
    resolution = [res.reduced_plane, res.reduced_plane] + [res.reduced_radial] * k
    knots = [0.0]
    for *_, hs in items:
        for h in hs:
            if h is not None:
                knots.extend(c for c in h.plateau if c >= 0)
    extra = [None, None] + [knots] * k

    def radial(hs, r):
        out = np.ones_like(r)
        for h in hs:
            if h is not None:
                out = out * h(r)
        return out

    def fn(axes):
        xs, ys, rads = axes[0], axes[1], axes[2:]
        total = 0.0
        for grid_fn, _, _, hs in items:
            M = grid_fn([xs, ys])
            W = np.ones(())
            for r in rads:
                W = np.multiply.outer(W, radial(hs, r))
            total = total + np.multiply.outer(M, W)
        return total

    lip = [0.0] * (2 + k)
    for _, cap, (cx, cy), hs in items:
        lip[0] += cx
        lip[1] += cy
        dcap = sum(h.deriv_cap for h in hs if h is not None)
        for i in range(k):
            lip[2 + i] += cap * dcap
    return sup_norm(fn, lows, highs, lip, resolution, on_grid=True, extra=extra,
                    chunk_points=1 << 21, strict=False)


def plane_bracket_sup(P: PlaneFn, Q: PlaneFn, box, res: Resolution = DEFAULT_RESOLUTION,
                      weight: float = 1.0) -> SupNormReport:
    """Certified sup of |{P, Q}| over a plane box."""
    pb = PlaneBracket(P, Q, weight)
    if pb.is_zero:
        return SupNormReport(0.0, 0.0, (float(box[0][0]), float(box[1][0])), ())
    knots = _plane_knots([P, Q])
    return _plane_sup(lambda ax: pb.grid(ax[0], ax[1]), list(pb.lipschitz()), box, res.plane,
                      extra=list(knots), refine=res.refine, terms=pb.interval_terms())


def bracket_sup(F: TensorFn, G: TensorFn, space: ModelSpace,
                res: Resolution = DEFAULT_RESOLUTION) -> SupNormReport:
    """Certified sup of |{F, G}| over the model space."""
    br = Bracket(F, G)
    n = space.n
    if br.is_zero:
        return SupNormReport(0.0, 0.0, tuple([0.0] * space.dim), ())
    if len(br.groups) == 1:
        pb, hF, hG = br.groups[0]
        knots = _plane_knots([pb.P, pb.Q])
        plane = _plane_sup(lambda ax: pb.grid(ax[0], ax[1]), list(pb.lipschitz()),
                           space.plane_box, res.plane, extra=list(knots), refine=res.refine,
                           terms=pb.interval_terms())
        rad = _radial_product_sup([hF, hG], space.annulus_radius, res.radial)
        return _combine(plane, rad, n)
    items = []
    for pb, hF, hG in br.groups:
        items.append((lambda ax, pb=pb: pb.grid(ax[0], ax[1]), pb.cap(), pb.lipschitz(), (hF, hG)))
    return _reduced_sup(items, n, space, res)


def norm_sup(F: TensorFn, space: ModelSpace,
             res: Resolution = DEFAULT_RESOLUTION) -> SupNormReport:
    """Certified sup of |F| over the model space."""
    n = space.n
    if not F.parts:
        return SupNormReport(0.0, 0.0, tuple([0.0] * space.dim), ())
    if len(F.parts) == 1:
        P, h = F.parts[0]
        knots = _plane_knots([P])
        lip = [P.cap(1, 0), P.cap(0, 1)]
        plane = _plane_sup(lambda ax: P.grid(ax[0], ax[1]), lip, space.plane_box,
                           res.plane, extra=list(knots), refine=res.refine,
                           terms=P.interval_terms())
        rad = _radial_product_sup([h], space.annulus_radius, res.radial)
        return _combine(plane, rad, n)
    items = [(lambda ax, P=P: P.grid(ax[0], ax[1]), P.cap(), (P.cap(1, 0), P.cap(0, 1)), (h,))
             for P, h in F.parts]
    return _reduced_sup(items, n, space, res)


def reduced_values(F: TensorFn, xs, ys, rs):
    """F on the diagonal reduced grid (x, y, |w_1| = ... = |w_{n-1}| = r): shape (nx, ny, nr)."""
    out = np.zeros((np.size(xs), np.size(ys), np.size(rs)))
    for P, h in F.parts:
        W = _radial_eval(h, np.asarray(rs, float)) ** (F.n - 1)
        out += P.grid(xs, ys)[:, :, None] * W[None, None, :]
    return out


def reduced_bracket(F: TensorFn, G: TensorFn, xs, ys, rs):
    out = np.zeros((np.size(xs), np.size(ys), np.size(rs)))
    rs = np.asarray(rs, float)
    for pb, hF, hG in Bracket(F, G).groups:
        W = (_radial_eval(hF, rs) * _radial_eval(hG, rs)) ** (F.n - 1)
        out += pb.grid(xs, ys)[:, :, None] * W[None, None, :]
    return out
