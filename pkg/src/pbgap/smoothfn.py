"""One-dimensional smooth building blocks.

Every bump used by the constructions is a C-infinity "trapezoid": it climbs
from 0 to 1 on a rising ramp, stays at 1 on a closed plateau (possibly a
single point) and falls back to 0.  On each ramp the derivative is itself a
smoothed plateau

    f'(x) = T * S((x - x0) / tau) * S((x0 + L - x) / tau),   L = 1/T + tau,

where S is the standard exp(-1/t) transition.  Since S(t) + S(1 - t) = 1,
the integral of S over [0, 1] is 1/2 and the ramp gains exactly T * (L - tau) = 1.
The derivative reaches its maximum T exactly, and |f''| <= 2 T / tau because
max S' = S'(1/2) = 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import InfeasibleSpec

#: max of S' on [0, 1]; attained at t = 1/2 where S'(1/2) = psi'(1/2) / (2 psi(1/2)) = 2.
TRANSITION_SLOPE = 2.0
#: upper bound for max |S''| on [0, 1] (sampled maximum 9.8410 near t = 0.78).
TRANSITION_CURVATURE = 9.85


def _psi(t):
    t = np.asarray(t, dtype=float)
    pos = t > 0
    out = np.zeros_like(t)
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def transition(t):
    """Smooth step S: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    a = _psi(t)
    b = _psi(1.0 - t)
    return a / (a + b)


def transition_deriv(t):
    t = np.asarray(t, dtype=float)
    a = _psi(t)
    b = _psi(1.0 - t)
    with np.errstate(divide="ignore", invalid="ignore"):
        da = np.where(t > 0, a / np.where(t > 0, t, 1.0) ** 2, 0.0)
        db = np.where(t < 1, b / np.where(t < 1, 1.0 - t, 1.0) ** 2, 0.0)
    return (da * b + a * db) / (a + b) ** 2


def _build_transition_integral(cells=4096):
    # cumulative Gauss-Legendre per cell, then Hermite interpolation with exact slopes S
    nodes, weights = np.polynomial.legendre.leggauss(12)
    edges = np.linspace(0.0, 1.0, cells + 1)
    h = edges[1] - edges[0]
    mids = 0.5 * (edges[:-1] + edges[1:])
    pts = mids[:, None] + 0.5 * h * nodes[None, :]
    cell_int = 0.5 * h * (transition(pts) * weights[None, :]).sum(axis=1)
    cum = np.concatenate([[0.0], np.cumsum(cell_int)])
    # S(t) + S(1 - t) = 1 makes the total exactly 1/2; remove the rounding drift
    cum += (0.5 - cum[-1]) * edges
    return CubicHermiteSpline(edges, cum, transition(edges))


_PHI = _build_transition_integral()


def transition_integral(t):
    """Phi(t) = integral of S over [0, t], for t in [0, 1]."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return _PHI(t)


def _ramp_value(t, slope, tau, length):
    """Value of a rising ramp at offset t in [0, length]."""
    out = np.empty_like(t)
    lo = t <= tau
    hi = t >= length - tau
    mid = ~(lo | hi)
    out[lo] = slope * tau * transition_integral(t[lo] / tau)
    out[mid] = slope * (0.5 * tau + t[mid] - tau)
    out[hi] = 1.0 - slope * tau * transition_integral((length - t[hi]) / tau)
    return np.clip(out, 0.0, 1.0)


def _ramp_deriv(t, slope, tau, length):
    return slope * transition(t / tau) * transition((length - t) / tau)


def _ramp_second(t, slope, tau, length):
    a, b = t / tau, (length - t) / tau
    return slope / tau * (transition_deriv(a) * transition(b) - transition(a) * transition_deriv(b))


@dataclass(frozen=True)
class SmoothFn1D:
    """Smooth bump with values in [0, 1]: ramp up, plateau at 1, ramp down.

    ``plateau`` is the closed interval where the value is exactly 1; the
    closed support is ``[rise_start, fall_end]``.  Slopes and transition
    widths fully determine the ramps.
    """

    plateau: tuple[float, float]
    rise_slope: float
    rise_tau: float
    fall_slope: float
    fall_tau: float

    @property
    def rise_length(self) -> float:
        return 1.0 / self.rise_slope + self.rise_tau

    @property
    def fall_length(self) -> float:
        return 1.0 / self.fall_slope + self.fall_tau

    @property
    def rise_start(self) -> float:
        return self.plateau[0] - self.rise_length

    @property
    def fall_end(self) -> float:
        return self.plateau[1] + self.fall_length

    @property
    def support(self) -> tuple[float, float]:
        return (self.rise_start, self.fall_end)

    @property
    def deriv_cap(self) -> float:
        return max(self.rise_slope, self.fall_slope)

    @property
    def lipschitz(self) -> float:
        return self.deriv_cap

    @property
    def second_cap(self) -> float:
        return TRANSITION_SLOPE * max(self.rise_slope / self.rise_tau,
                                      self.fall_slope / self.fall_tau)

    value_cap = 1.0

    @property
    def third_cap(self) -> float:
        return TRANSITION_CURVATURE * max(self.rise_slope / self.rise_tau ** 2,
                                          self.fall_slope / self.fall_tau ** 2)

    def cap(self, order: int) -> float:
        """Uniform bound on the derivative of the given order (0 to 3)."""
        return (self.value_cap, self.deriv_cap, self.second_cap, self.third_cap)[order]

    def active_intervals(self, order: int) -> list[tuple[float, float, float]]:
        """(lo, hi, cap): open pieces outside which the order-th derivative vanishes.

        ``cap`` bounds that derivative on the piece.
        """
        if order == 0:
            return [(*self.support, 1.0)]
        c, d = self.plateau
        if order == 1:
            return [(self.rise_start, c, self.rise_slope), (d, self.fall_end, self.fall_slope)]
        if order == 2:
            # f' = T on the middle of each ramp; f'' lives on the two transition layers
            rt, ft = self.rise_tau, self.fall_tau
            rc = TRANSITION_SLOPE * self.rise_slope / rt
            fc = TRANSITION_SLOPE * self.fall_slope / ft
            return [(self.rise_start, self.rise_start + rt, rc), (c - rt, c, rc),
                    (d, d + ft, fc), (self.fall_end - ft, self.fall_end, fc)]
        if order == 3:
            rt, ft = self.rise_tau, self.fall_tau
            rc = TRANSITION_CURVATURE * self.rise_slope / rt ** 2
            fc = TRANSITION_CURVATURE * self.fall_slope / ft ** 2
            return [(self.rise_start, self.rise_start + rt, rc), (c - rt, c, rc),
                    (d, d + ft, fc), (self.fall_end - ft, self.fall_end, fc)]
        raise ValueError(f"no cap for derivative order {order}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.zeros_like(x)
        c, d = self.plateau
        out[(x >= c) & (x <= d)] = 1.0
        rise = (x > self.rise_start) & (x < c)
        if rise.any():
            out[rise] = _ramp_value(x[rise] - self.rise_start, self.rise_slope,
                                    self.rise_tau, self.rise_length)
        fall = (x > d) & (x < self.fall_end)
        if fall.any():
            out[fall] = _ramp_value(self.fall_end - x[fall], self.fall_slope,
                                    self.fall_tau, self.fall_length)
        return out[0] if scalar else out

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.zeros_like(x)
        c, d = self.plateau
        rise = (x > self.rise_start) & (x < c)
        if rise.any():
            out[rise] = _ramp_deriv(x[rise] - self.rise_start, self.rise_slope,
                                    self.rise_tau, self.rise_length)
        fall = (x > d) & (x < self.fall_end)
        if fall.any():
            out[fall] = -_ramp_deriv(self.fall_end - x[fall], self.fall_slope,
                                     self.fall_tau, self.fall_length)
        return out[0] if scalar else out

    def second(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.zeros_like(x)
        c, d = self.plateau
        rise = (x > self.rise_start) & (x < c)
        if rise.any():
            out[rise] = _ramp_second(x[rise] - self.rise_start, self.rise_slope,
                                     self.rise_tau, self.rise_length)
        fall = (x > d) & (x < self.fall_end)
        if fall.any():
            out[fall] = _ramp_second(self.fall_end - x[fall], self.fall_slope,
                                     self.fall_tau, self.fall_length)
        return out[0] if scalar else out

    def evaluate(self, x, order: int = 0):
        if order == 0:
            return self(x)
        if order == 1:
            return self.deriv(x)
        if order == 2:
            return self.second(x)
        raise ValueError(f"order {order} is not evaluated, only capped")

    def shifted(self, dx: float) -> "SmoothFn1D":
        c, d = self.plateau
        return SmoothFn1D((c + dx, d + dx), self.rise_slope, self.rise_tau,
                          self.fall_slope, self.fall_tau)

    def dilated(self, lam: float) -> "SmoothFn1D":
        """x -> f(x / lam)."""
        c, d = self.plateau
        return SmoothFn1D((c * lam, d * lam), self.rise_slope / lam, self.rise_tau * lam,
                          self.fall_slope / lam, self.fall_tau * lam)

    def to_dict(self) -> dict:
        return {
            "kind": "bump",
            "knots": [self.rise_start, self.plateau[0], self.plateau[1], self.fall_end],
            "plateau": list(self.plateau),
            "rise_slope": self.rise_slope,
            "rise_tau": self.rise_tau,
            "fall_slope": self.fall_slope,
            "fall_tau": self.fall_tau,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SmoothFn1D":
        if data.get("kind") != "bump":
            raise ValueError(f"not a bump descriptor: {data.get('kind')!r}")
        return cls(tuple(data["plateau"]), data["rise_slope"], data["rise_tau"],
                   data["fall_slope"], data["fall_tau"])


@dataclass(frozen=True)
class BumpSpec:
    """Request for a bump: open support, closed plateau, optional slope targets.

    ``target_deriv_sup`` applies to both ramps; ``rise_target``/``fall_target``
    override it per side.  A side without a target gets a gentle ramp using
    most of the available gap.
    """

    support: tuple[float, float]
    plateau: tuple[float, float]
    target_deriv_sup: float | None = None
    rise_target: float | None = None
    fall_target: float | None = None


def _side(gap: float, target: float | None, name: str) -> tuple[float, float]:
    if not gap > 0:
        raise InfeasibleSpec(f"{name} ramp has no room (gap {gap})")
    if target is None:
        length = 0.9 * gap
        tau = length / 3.0
        return 1.0 / (length - tau), tau
    if not target * gap > 1.0:
        raise InfeasibleSpec(
            f"{name} ramp of length {gap} cannot climb to 1 with slope {target}")
    tau = min(0.9 * (gap - 1.0 / target), 0.5 / target)
    return float(target), tau


def make_ramp(spec: BumpSpec) -> SmoothFn1D:
    a, b = spec.support
    c, d = spec.plateau
    if not (a <= c <= d <= b):
        raise InfeasibleSpec(f"plateau {spec.plateau} not inside support {spec.support}")
    rise_target = spec.rise_target if spec.rise_target is not None else spec.target_deriv_sup
    fall_target = spec.fall_target if spec.fall_target is not None else spec.target_deriv_sup
    rs, rt = _side(c - a, rise_target, "rising")
    fs, ft = _side(b - d, fall_target, "falling")
    return SmoothFn1D((float(c), float(d)), rs, rt, fs, ft)


def make_plateau_cutoff(support: tuple[float, float],
                        plateau: tuple[float, float]) -> SmoothFn1D:
    a, b = support
    c, d = plateau
    if not (a < c <= d < b):
        raise InfeasibleSpec(f"plateau {plateau} must lie strictly inside {support}")
    return make_ramp(BumpSpec(support, plateau))


@dataclass(frozen=True)
class ShrinkMap:
    """Odd 1-Lipschitz map that kills [-alpha, alpha].

    w(x) = sign(x) m(|x| - alpha) with m(t) = delta*alpha * Phi(t / (delta*alpha))
    on [0, delta*alpha] and t - delta*alpha/2 beyond, so m' = S(t / (delta*alpha)).
    Hence |w(x) - x| <= (1 + delta/2) alpha.
    """

    alpha: float
    delta: float

    @property
    def width(self) -> float:
        return self.delta * self.alpha

    @property
    def deriv_cap(self) -> float:
        return 1.0

    lipschitz = deriv_cap

    @property
    def second_cap(self) -> float:
        return 0.0 if self.alpha == 0 else TRANSITION_SLOPE / self.width

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.alpha == 0:
            return x.copy() if x.ndim else x
        t = np.abs(x) - self.alpha
        w = self.width
        m = np.where(t > w, t - 0.5 * w, w * transition_integral(np.clip(t, 0.0, w) / w))
        m = np.where(t <= 0, 0.0, m)
        return np.sign(x) * m

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        if self.alpha == 0:
            return np.ones_like(x)
        return transition((np.abs(x) - self.alpha) / self.width)

    def to_dict(self) -> dict:
        return {"kind": "shrink", "knots": [-self.alpha, self.alpha],
                "alpha": self.alpha, "delta": self.delta}

    @classmethod
    def from_dict(cls, data: dict) -> "ShrinkMap":
        return cls(data["alpha"], data["delta"])


def make_shrink(alpha: float, delta: float) -> ShrinkMap:
    if alpha < 0 or not delta > 0:
        raise ValueError("need alpha >= 0 and delta > 0")
    return ShrinkMap(float(alpha), float(delta))


def compose1d(outer: ShrinkMap, inner_value, inner_grad_norm):
    """Value and gradient-norm bound of ``outer`` composed with an inner function."""
    value = outer(inner_value)
    grad = np.abs(outer.deriv(inner_value)) * np.asarray(inner_grad_norm, dtype=float)
    return value, grad


def descriptor_to_fn(data: dict):
    kind = data.get("kind")
    if kind == "bump":
        return SmoothFn1D.from_dict(data)
    if kind == "shrink":
        return ShrinkMap.from_dict(data)
    raise ValueError(f"unknown descriptor kind {kind!r}")


def ramp_feasible(slope: float, gap: float) -> bool:
    return math.isfinite(slope) and slope * gap > 1.0
