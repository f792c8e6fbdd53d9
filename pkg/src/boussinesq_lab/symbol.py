"""Dispersion symbols: Phi(xi) = |xi| sqrt(1 + xi^2) and the comparison xi^2."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NoStationaryPoint(ValueError):
    """Requested slope lies outside the range of Phi' on [0, inf)."""


@dataclass(frozen=True)
class DispersionSymbol:
    kind: str = "boussinesq"

    def __post_init__(self):
        if self.kind not in ("boussinesq", "schrodinger"):
            raise ValueError(f"unknown symbol kind {self.kind!r}")

    def phi(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.kind == "schrodinger":
            return xi * xi
        a = np.abs(xi)
        return a * np.hypot(1.0, a)

    def dphi(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.kind == "schrodinger":
            return 2 * xi
        a = np.abs(xi)
        r = np.hypot(1.0, a)
        # (1 + 2a^2)/sqrt(1+a^2) written as r + a^2/r to avoid overflow
        return np.sign(xi) * (r + a * (a / r)) + (xi == 0)

    def ddphi(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.kind == "schrodinger":
            return np.full_like(xi, 2.0)
        a = np.abs(xi)
        r = np.hypot(1.0, a)
        # (3a + 2a^3)/(1+a^2)^{3/2} = a (3 + 2 a^2) / r^3
        return (a / r) * ((3.0 + 2.0 * a * a) / (r * r))

    def eval(self, xi):
        return self.phi(xi), self.dphi(xi), self.ddphi(xi)


BOUSSINESQ = DispersionSymbol("boussinesq")
SCHRODINGER = DispersionSymbol("schrodinger")


def symbol_eval(sym: DispersionSymbol, xi):
    """Return (Phi, Phi', Phi'') at xi."""
    return sym.eval(xi)


def excess(xi):
    """h(xi) = Phi(xi) - xi^2 for the Boussinesq symbol, evaluated stably.

    h(a) = a / (a + sqrt(1 + a^2)) for a = |xi|, so 0 <= h < 1/2.
    """
    a = np.abs(np.asarray(xi, dtype=float))
    return a / (a + np.hypot(1.0, a))


def excess_deficit(xi):
    """1/2 - h(|xi|), nonnegative and ~ 1/(8 xi^2) for large |xi|."""
    a = np.abs(np.asarray(xi, dtype=float))
    # r - a = 1 / (r + a) avoids cancellation
    return 0.5 / (a + np.hypot(1.0, a)) ** 2


def stationary_point(sym: DispersionSymbol, slope: float, tol: float = 1e-12) -> float:
    """Solve Phi'(xi0) = slope for xi0 >= 0."""
    slope = float(slope)
    if sym.kind == "schrodinger":
        if slope < 0:
            raise NoStationaryPoint(f"slope {slope} < 0")
        return slope / 2
    if not np.isfinite(slope) or slope < 1:
        raise NoStationaryPoint(f"slope {slope} below the range [1, inf) of Phi'")
    if slope == 1:
        return 0.0
    lo, hi = 0.0, max(1.0, slope)
    x = slope / 2  # Phi' ~ 2 xi for large xi
    target = tol * max(1.0, slope)
    for _ in range(200):
        f = float(sym.dphi(x)) - slope
        if abs(f) <= target:
            return x
        if f > 0:
            hi = x
        else:
            lo = x
        d = float(sym.ddphi(x))
        xn = x - f / d if d > 0 else 0.5 * (lo + hi)
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        x = xn
    return x


def focusing_time(x: float, v: float) -> float:
    """t(x) = x / Phi'(1/v^2) = x v^2 sqrt(v^4 + 1) / (v^4 + 2)."""
    if not (x > 0 and v > 0):
        raise ValueError("focusing_time needs x > 0 and v > 0")
    v2 = v * v
    v4 = v2 * v2
    return x * v2 * np.sqrt(v4 + 1.0) / (v4 + 2.0)
