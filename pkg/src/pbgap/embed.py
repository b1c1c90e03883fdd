"""Monomial symplectic curve z -> (z^k, z, 0, ..., 0) on the unit disc.

Its area grows like pi (k + 1) while the image stays in the ball of radius
sqrt(2), which is how a small ball can contain discs of large area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss


@dataclass(frozen=True)
class MonomialCurve:
    k: int
    n: int = 2

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if self.n < 2:
            raise ValueError("the curve needs at least two complex coordinates")

    def __call__(self, z):
        """Points of C^n as an (..., n) complex array."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (self.n,), dtype=complex)
        out[..., 0] = z ** self.k
        out[..., 1] = z
        return out

    def density(self, x, y):
        """Pull-back of the standard form: |d(z^k)/dz|^2 + |dz/dz|^2."""
        r2 = np.asarray(x, float) ** 2 + np.asarray(y, float) ** 2
        return self.k ** 2 * r2 ** (self.k - 1) + 1.0

    @property
    def analytic_area(self) -> float:
        return math.pi * (self.k + 1)


def _radial_integral(fn, a: float, b: float, nodes: int) -> float:
    t, w = leggauss(nodes)
    r = 0.5 * (b - a) * t + 0.5 * (a + b)
    return 0.5 * (b - a) * float(np.sum(w * fn(r)))


def symplectic_area(curve: MonomialCurve, tol: float = 1e-10, angles: int = 16,
                    max_levels: int = 30) -> float:
    """Gauss-Legendre in r times the trapezoid rule in theta over the unit disc.

    The radial interval is split geometrically towards r = 1, where the
    density k^2 r^(2k-2) concentrates, and the split is refined until two
    successive levels agree to ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    theta = 2 * np.pi * np.arange(angles) / angles

    def integrand(r):
        x = r[:, None] * np.cos(theta)[None, :]
        y = r[:, None] * np.sin(theta)[None, :]
        return curve.density(x, y).mean(axis=1) * 2 * np.pi * r

    prev = None
    for level in range(1, max_levels + 1):
        edges = np.concatenate([[0.0], 1 - 0.5 ** np.arange(1, level + 1), [1.0]])
        nodes = max(8, curve.k + 4)
        total = sum(_radial_integral(integrand, a, b, nodes) for a, b in zip(edges[:-1], edges[1:]))
        if prev is not None and abs(total - prev) <= tol:
            return total
        prev = total
    return prev


def pick_k(target_area: float) -> int:
    """Smallest k >= 1 with pi (k + 1) >= target_area."""
    if not target_area > 0:
        raise ValueError("target area must be positive")
    k = max(1, math.ceil(target_area / math.pi - 1))
    # guard the ceiling against rounding in target / pi
    while k > 1 and math.pi * k >= target_area * (1 - 1e-12):
        k -= 1
    while math.pi * (k + 1) < target_area * (1 - 1e-12):
        k += 1
    return k


def check_containment(curve: MonomialCurve, samples: int = 100_000, seed: int = 0) -> float:
    """Largest |u(z)|^2 over random z in the closed unit disc (boundary included); must be <= 2."""
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.random(samples))
    r[: samples // 10] = 1.0
    z = r * np.exp(2j * np.pi * rng.random(samples))
    return float(np.max(np.sum(np.abs(curve(z)) ** 2, axis=-1)))


def check_injective(curve: MonomialCurve, pairs: int = 10_000, seed: int = 0) -> bool:
    """Distinct points of the disc have distinct images (the second coordinate is z)."""
    rng = np.random.default_rng(seed)
    z1 = np.sqrt(rng.random(pairs)) * np.exp(2j * np.pi * rng.random(pairs))
    z2 = np.sqrt(rng.random(pairs)) * np.exp(2j * np.pi * rng.random(pairs))
    distinct = z1 != z2
    diff = np.max(np.abs(curve(z1) - curve(z2)), axis=-1)
    return bool(np.all(diff[distinct] > 0))
