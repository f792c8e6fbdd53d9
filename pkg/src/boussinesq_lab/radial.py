"""Radial evolution in dimension n >= 2 through Bessel functions.

The radial inverse transform is

    B_t f(u) = (2 pi)^{-n/2} u^{1 - n/2} int_0^inf J_{n/2-1}(r u) e^{i t Phi(r)} fhat(r) r^{n/2} dr,

with the convention f(x) = (2 pi)^{-n} int e^{i x xi} fhat(xi) d xi.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma as _gamma
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .fitting import PowerFit, decades, loglog_fit
from .grid import smooth_step
from .quadrature import oscillatory_edges, panel_nodes
from .symbol import BOUSSINESQ, DispersionSymbol

SERIES_MAX = 8.0
ASYMPTOTIC_MIN = 40.0


# Bessel functions ----------------------------------------------------------------

def _asymptotic_start(m: float) -> float:
    # the Hankel expansion needs r well beyond m^2 before its terms turn over
    return max(ASYMPTOTIC_MIN, 2.0 * m * m)


def _series(m: float, r: np.ndarray) -> np.ndarray:
    h2 = -(r / 2) ** 2
    term = (r / 2) ** m / _gamma(m + 1)
    total = term.copy()
    for k in range(1, 80):
        term = term * h2 / (k * (k + m))
        total += term
        if np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


@lru_cache(maxsize=64)
def _jacobi_rule(m: float, k: int):
    a = m - 0.5
    x, w = special.roots_jacobi(k, a, a)
    return x, w


def _integral(m: float, r: np.ndarray) -> np.ndarray:
    """J_m(r) = (r/2)^m / (Gamma(m+1/2) sqrt(pi)) int_{-1}^1 cos(r x) (1-x^2)^{m-1/2} dx."""
    k = int(_asymptotic_start(m) / 2) + 48
    x, w = _jacobi_rule(float(m), k)
    out = np.empty_like(r)
    for s in range(0, r.size, 4096):
        rr = r[s:s + 4096]
        out[s:s + 4096] = np.cos(np.outer(rr, x)) @ w
    return out * (r / 2) ** m / (_gamma(m + 0.5) * np.sqrt(np.pi))


def _asymptotic(m: float, r: np.ndarray) -> np.ndarray:
    """Hankel expansion truncated at its smallest term."""
    mu = 4 * m * m
    P = np.ones_like(r)
    Q = np.zeros_like(r)
    term = np.ones_like(r)
    prev = np.full_like(r, np.inf)
    live = np.ones(r.shape, dtype=bool)
    for k in range(1, 200):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8 * r)
        mag = np.abs(term)
        live &= (mag < prev) & (mag > 1e-17)
        if not np.any(live):
            break
        t = np.where(live, term, 0.0)
        if k % 2 == 1:
            Q += t * (-1) ** ((k - 1) // 2)
        else:
            P += t * (-1) ** (k // 2)
        prev = np.where(live, mag, prev)
    w = r - m * np.pi / 2 - np.pi / 4
    return np.sqrt(2 / (np.pi * r)) * (P * np.cos(w) - Q * np.sin(w))


def bessel_j(m: float, r):
    """J_m(r) for m > -1/2 and r >= 0.

    Power series for r <= 8, a Gauss-Jacobi rule on the Poisson integral up to
    max(40, 2 m^2), then the Hankel expansion truncated at its smallest term.
    """
    m = float(m)
    if not m > -0.5:
        raise ValueError("order m must exceed -1/2")
    r_in = np.asarray(r, dtype=float)
    if np.any(r_in < 0):
        raise ValueError("argument r must be nonnegative")
    r = r_in.ravel()
    out = np.empty_like(r)
    lo = r <= SERIES_MAX
    hi = r >= _asymptotic_start(m)
    mid = ~(lo | hi)
    if np.any(lo):
        out[lo] = _series(m, r[lo])
    if np.any(mid):
        out[mid] = _integral(m, r[mid])
    if np.any(hi):
        out[hi] = _asymptotic(m, r[hi])
    out = out.reshape(r_in.shape)
    return float(out) if out.ndim == 0 else out


def seam_gaps(m: float) -> dict:
    """Branch disagreement at the two switchover points."""
    a = np.array([SERIES_MAX])
    b = np.array([_asymptotic_start(m)])
    return {
        "series/integral": float(abs(_series(m, a) - _integral(m, a))[0]),
        "integral/asymptotic": float(abs(_integral(m, b) - _asymptotic(m, b))[0]),
    }


def half_integer_closed_form(m: float, r):
    """J_{1/2} and J_{3/2} in elementary form."""
    r = np.asarray(r, dtype=float)
    pre = np.sqrt(2 / (np.pi * r))
    if m == 0.5:
        return pre * np.sin(r)
    if m == 1.5:
        return pre * (np.sin(r) / r - np.cos(r))
    raise ValueError("closed form available for m = 1/2, 3/2 only")


def small_argument_constant(m: float, r_grid) -> float:
    """max |J_m(r)| / r^m over the grid, the constant in |J_m(r)| <= C r^m."""
    r = np.asarray(r_grid, float)
    return float(np.max(np.abs(bessel_j(m, r)) / r ** m))


@dataclass(frozen=True)
class BesselPair:
    """Coefficients of the two-exponential model t^{1/2} J_m(t) ~ b1 e^{it} + b2 e^{-it}."""
    n: int

    @property
    def m(self) -> float:
        return self.n / 2 - 1

    @property
    def b1(self) -> complex:
        return 0.5 * np.sqrt(2 / np.pi) * np.exp(-1j * np.pi * (self.n - 1) / 4)

    @property
    def b2(self) -> complex:
        return np.conj(self.b1)

    def model(self, t):
        t = np.asarray(t, float)
        return (self.b1 * np.exp(1j * t) + self.b2 * np.exp(-1j * t)).real


@dataclass(frozen=True)
class DefectFit:
    n: int
    slope: float  # -inf when the model is exact
    far_constant: float  # max d(t) t over t > 1
    near_constant: float  # max d(t) over t <= 1
    fit: Optional[PowerFit]


def bessel_asymptotic_defect(n: int, r_grid, near_grid=None, blocks_per_decade: int = 4) -> DefectFit:
    """Decay of d(t) = |t^{1/2} J_{n/2-1}(t) - (b1 e^{it} + b2 e^{-it})|.

    The slope is fitted to block maxima over log-spaced blocks, which skips the zeros
    of the oscillating defect.
    """
    if n < 2:
        raise ValueError("dimension n must be at least 2")
    t = np.sort(np.asarray(r_grid, float))
    if t[0] > 1 + 1e-12 or t[-1] < 1e4 * (1 - 1e-12):
        raise ValueError("r_grid must span [1, 1e4]")
    pair = BesselPair(n)
    d = np.abs(np.sqrt(t) * bessel_j(pair.m, t) - pair.model(t))
    near = np.geomspace(1e-6, 1.0, 400) if near_grid is None else np.asarray(near_grid, float)
    dn = np.abs(np.sqrt(near) * bessel_j(pair.m, near) - pair.model(near))
    far = t > 1
    far_c = float(np.max(d[far] * t[far])) if np.any(far) else 0.0
    if np.max(d) <= 1e-10:  # roundoff only: the model is exact
        return DefectFit(n, -np.inf, far_c, float(dn.max()), None)
    edges = np.geomspace(t[0], t[-1], int(round(decades(t) * blocks_per_decade)) + 1)
    bt, bd = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (t >= lo) & (t <= hi)
        if np.any(sel):
            k = np.argmax(d[sel])
            bt.append(t[sel][k])
            bd.append(d[sel][k])
    fit = loglog_fit(bt, bd)
    return DefectFit(n, fit.slope, far_c, float(dn.max()), fit)


# radial profiles and evolution ---------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """Radial fhat on a positive increasing r-grid, optionally with its exact callable.

    Quadratures use ``fn`` when present and otherwise a monotone cubic interpolant of
    the samples.
    """
    n: int
    r: np.ndarray
    fhat: np.ndarray
    fn: Optional[Callable] = None
    support: tuple = ()
    breakpoints: tuple = ()

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension n must be at least 2")
        r = np.asarray(self.r, float)
        f = np.asarray(self.fhat, dtype=complex)
        if r.ndim != 1 or r.shape != f.shape or r.size < 2:
            raise ValueError("r and fhat must be matching 1-D arrays")
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("r-grid must be positive and strictly increasing")
        r.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "fhat", f)
        if not self.support:
            nz = np.nonzero(f)[0]
            sup = (float(r[nz[0]]), float(r[nz[-1]])) if nz.size else (float(r[0]), float(r[0]))
            object.__setattr__(self, "support", sup)

    @classmethod
    def from_function(cls, n: int, fn: Callable, support, breakpoints=(), r_max: Optional[float] = None,
                      n_r: int = 512) -> "RadialProfile":
        a, b = map(float, support)
        r_max = b if r_max is None else r_max
        r = np.geomspace(min(a, r_max) * 1e-3 if a > 0 else r_max * 1e-6, r_max, n_r)
        return cls(n, r, np.asarray(fn(r), dtype=complex), fn, (a, b), tuple(breakpoints))

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, float)
        if self.fn is not None:
            return np.asarray(self.fn(r), dtype=complex)
        re = PchipInterpolator(self.r, self.fhat.real, extrapolate=False)(r)
        im = PchipInterpolator(self.r, self.fhat.imag, extrapolate=False)(r)
        return np.nan_to_num(re + 1j * im)

    def scaled(self, c: complex) -> "RadialProfile":
        fn = None if self.fn is None else (lambda r, g=self.fn: c * np.asarray(g(r)))
        return RadialProfile(self.n, self.r, c * self.fhat, fn, self.support, self.breakpoints)

    def l2_norm(self) -> float:
        """||f||_{L^2(R^n)} by Plancherel."""
        return homogeneous_norm(self, 0.0)


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n."""
    return 2 * np.pi ** (n / 2) / _gamma(n / 2)


def _profile_integral(profile: RadialProfile, weight: Callable, panels: int = 256) -> float:
    a, b = profile.support
    cuts = sorted({a, b, *[p for p in profile.breakpoints if a < p < b]})
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        x, w = panel_nodes(np.linspace(lo, hi, panels + 1), 10)
        total += float(np.sum(weight(x) * np.abs(profile(x)) ** 2 * w))
    return total


def homogeneous_norm(profile: RadialProfile, s: float) -> float:
    """||f||_{Hdot^s} = ((2 pi)^{-n} |S^{n-1}| int r^{2s} |fhat|^2 r^{n-1} dr)^{1/2}."""
    n = profile.n
    val = _profile_integral(profile, lambda r: r ** (2 * s + n - 1))
    return float(np.sqrt(sphere_area(n) * val / (2 * np.pi) ** n))


def radial_evolve_many(profile: RadialProfile, u_grid, times, symbol: DispersionSymbol = BOUSSINESQ,
                       order: int = 10, chunk: int = 64, node_chunk: int = 16384,
                       max_panels: int = 2_000_000) -> np.ndarray:
    """B_t f(u) for every u and every t, shape (len(u), len(times))."""
    n = profile.n
    u = np.atleast_1d(np.asarray(u_grid, float))
    times = np.atleast_1d(np.asarray(times, float))
    if np.any(u < 0):
        raise ValueError("u must be nonnegative")
    if np.any(u == 0) and n != 2:
        raise ValueError("u = 0 is only supported for n = 2")
    m = n / 2 - 1
    a, b = profile.support
    tmax = float(np.max(np.abs(times))) if times.size else 0.0
    out = np.zeros((u.size, times.size), dtype=complex)
    if not b > a:
        return out
    order_idx = np.argsort(u, kind="stable")
    for s in range(0, u.size, chunk):
        idx = order_idx[s:s + chunk]
        uc = u[idx]
        umax = float(uc.max())
        edges = oscillatory_edges(a, b, lambda r: umax + tmax * np.abs(symbol.dphi(r)),
                                  breakpoints=profile.breakpoints, max_width=(b - a) / 8,
                                  max_panels=max_panels)
        r_all, w_all = panel_nodes(edges, order)
        acc = np.zeros((uc.size, times.size), dtype=complex)
        for c in range(0, r_all.size, node_chunk):  # ordered sum, bounded memory
            r, w = r_all[c:c + node_chunk], w_all[c:c + node_chunk]
            amp = profile(r) * r ** (n / 2) * w
            A = amp[:, None] * np.exp(1j * np.outer(symbol.phi(r), times))
            acc += bessel_j(m, np.outer(uc, r)) @ A
        pref = np.ones_like(uc) if n == 2 else uc ** (1 - n / 2)
        out[idx] = pref[:, None] * acc / (2 * np.pi) ** (n / 2)
    return out


def radial_evolve(profile: RadialProfile, u_grid, t_fn=0.0, symbol: DispersionSymbol = BOUSSINESQ,
                  **kw) -> np.ndarray:
    """B_{t(u)} f(u); ``t_fn`` is a constant or a callable of u."""
    u = np.atleast_1d(np.asarray(u_grid, float))
    if not callable(t_fn):
        return radial_evolve_many(profile, u, [float(t_fn)], symbol, **kw)[:, 0]
    t = np.broadcast_to(np.asarray(t_fn(u), float), u.shape)
    out = np.empty(u.size, dtype=complex)
    for tv in np.unique(t):
        sel = t == tv
        out[sel] = radial_evolve_many(profile, u[sel], [tv], symbol, **kw)[:, 0]
    return out


# weighted maximal norm -----------------------------------------------------------

@dataclass(frozen=True)
class WeightedNorm:
    value: float
    u_range: tuple
    decayed: bool  # False: the integrand was still significant at a cutoff
    peak: float

    def __float__(self) -> float:
        return self.value


def symmetric_time_grid(t_min: float = 1e-6, t_max: float = 10.0, per_decade: int = 8) -> np.ndarray:
    pos = np.geomspace(t_min, t_max, int(round(np.log10(t_max / t_min) * per_decade)) + 1)
    return np.concatenate([-pos[::-1], [0.0], pos])


def weighted_maximal_norm(profile: RadialProfile, q: float, alpha: float, t_grid,
                          s: Optional[float] = None, symbol: DispersionSymbol = BOUSSINESQ,
                          per_decade: int = 48, threshold: float = 1e-12, quiet_decades: int = 3,
                          u_bounds=(1e-8, 1e6), t_chunk: int = 64,
                          lower_threshold: float = 1e-6) -> WeightedNorm:
    """(|S^{n-1}| int_0^inf sup_t |B_t f(u)|^q u^{alpha+n-1} du)^{1/q}.

    The u-integral is a trapezoid rule in log u, grown one decade at a time upward
    until the integrand has stayed below ``threshold`` times its peak for
    ``quiet_decades`` decades, or ``u_bounds`` is reached (then ``decayed`` is False).
    Downward it stops once the integrand is below ``lower_threshold`` of its peak and
    closes the remaining tail with g(u_lo)/(alpha+n); B_t f is even and smooth in u,
    so the closure is exact up to a relative O(u_lo^2).
    """
    n = profile.n
    if q < 2:
        raise ValueError("q must be at least 2")
    if s is not None and s < 0.5 and q > 2 / (1 - 2 * s) + 1e-12:
        raise ValueError("q must not exceed 2/(1-2s)")
    if alpha + n <= 0:
        raise ValueError("alpha + n must be positive for local integrability")
    t = np.asarray(t_grid, float)
    if not np.allclose(np.sort(t), np.sort(-t), rtol=0, atol=1e-15):
        raise ValueError("t_grid must be symmetric about 0")
    if profile.support[1] <= profile.support[0] or not np.any(profile.fhat):
        return WeightedNorm(0.0, (0.0, 0.0), True, 0.0)

    def block(k: int) -> tuple[np.ndarray, np.ndarray]:
        uu = 10.0 ** (k + np.arange(per_decade) / per_decade)
        sup = np.zeros(uu.size)
        for c in range(0, t.size, t_chunk):
            v = np.abs(radial_evolve_many(profile, uu, t[c:c + t_chunk], symbol))
            np.maximum(sup, v.max(axis=1), out=sup)
        return uu, sup ** q * uu ** (alpha + n)  # the extra u is d(log u)

    blocks = {0: block(0)}
    lo_k, hi_k = 0, 0
    # decade k covers [10^k, 10^{k+1})
    k_min, k_max = int(np.floor(np.log10(u_bounds[0]))), int(np.ceil(np.log10(u_bounds[1]))) - 1

    def quiet(ks, thr=threshold) -> bool:
        peak = max(float(b[1].max()) for b in blocks.values())
        return all(k in blocks and blocks[k][1].max() <= thr * peak for k in ks)

    decayed = True
    while not quiet(range(hi_k - quiet_decades + 1, hi_k + 1)):
        if hi_k + 1 > k_max:
            decayed = False
            break
        hi_k += 1
        blocks[hi_k] = block(hi_k)
    while not quiet([lo_k], lower_threshold):
        if lo_k - 1 < k_min:
            decayed = False
            break
        lo_k -= 1
        blocks[lo_k] = block(lo_k)
    ks = sorted(blocks)
    g = np.concatenate([blocks[k][1] for k in ks])
    uu = np.concatenate([blocks[k][0] for k in ks])
    h = np.log(10) / per_decade
    val = sphere_area(n) * (h * (g.sum() - 0.5 * (g[0] + g[-1])) + g[0] / (alpha + n))
    return WeightedNorm(float(val ** (1 / q)), (float(uu[0]), float(uu[-1])), decayed, float(g.max()))


# sharpness scan ----------------------------------------------------------------

def annulus_bump(r):
    """Smooth bump supported in [1, 2] and equal to 1 on [5/4, 7/4]."""
    r = np.asarray(r, float)
    return smooth_step(4 * (1.25 - r)) * smooth_step(4 * (r - 1.75))


def annulus_profile(n: int, lam: float = 1.0) -> RadialProfile:
    fn = lambda r: annulus_bump(np.asarray(r, float) / lam).astype(complex)
    return RadialProfile.from_function(n, fn, (lam, 2 * lam), (1.25 * lam, 1.75 * lam))


def half_radius(n: int, u_max: float = 4.0) -> float:
    """First u where B_0 of the unit annulus bump falls to half its value at 0."""
    prof = annulus_profile(n)
    u0 = 1e-9 if n > 2 else 0.0
    v0 = radial_evolve(prof, [u0]).real[0]
    uu = np.linspace(1e-9, u_max, 801)
    vals = radial_evolve(prof, uu).real
    k = int(np.argmax(vals <= 0.5 * v0))
    if vals[k] > 0.5 * v0:
        raise ValueError("no half-value radius below u_max")
    return float(brentq(lambda x: radial_evolve(prof, [x]).real[0] - 0.5 * v0, uu[k - 1], uu[k], xtol=1e-14))


def weighted_floor(n: int, q: float, alpha: float, lam: float, delta: float, nodes: int = 64) -> float:
    """(|S^{n-1}| int_0^{delta/lam} |B_0 f_lam(u)|^q u^{alpha+n-1} du)^{1/q}.

    Gauss-Jacobi in u absorbs the u^{alpha+n-1} weight exactly.
    """
    beta = alpha + n - 1
    if not beta > -1:
        raise ValueError("alpha + n must be positive")
    U = delta / lam
    x, w = special.roots_jacobi(nodes, 0.0, beta)
    u = U * (x + 1) / 2
    vals = np.abs(radial_evolve(annulus_profile(n, lam), u))
    integral = (U / 2) ** (beta + 1) * float(np.sum(w * vals ** q))
    return float((sphere_area(n) * integral) ** (1 / q))


@dataclass(frozen=True)
class SharpnessReport:
    n: int
    s: float
    q: float
    alpha: float
    lam: np.ndarray
    norm: np.ndarray
    weighted: np.ndarray
    delta: float
    norm_fit: PowerFit
    weighted_fit: PowerFit
    critical_alpha: float
    margin_large: float  # weighted slope minus norm slope for lam > 1
    margin_small: float  # same for lam < 1
    tol: float = 0.1

    @property
    def predicted_norm_slope(self) -> float:
        return self.n / 2 + self.s

    @property
    def predicted_weighted_slope(self) -> float:
        return self.n - (self.alpha + self.n) / self.q

    @property
    def verdict(self) -> bool:
        """Both scaling regimes balance within the tolerance."""
        return abs(self.margin_large) <= self.tol and abs(self.margin_small) <= self.tol

    def rows(self) -> list:
        return [(float(l), float(a), float(b)) for l, a, b in zip(self.lam, self.norm, self.weighted)]


def sharpness_scan(n: int, s: float, q: float, alpha: float, lam_list, map_fn=map,
                   tol: float = 0.1) -> SharpnessReport:
    """Scaling of ||f_lam||_{Hdot^s} and of the weighted B_0 floor for fhat_lam = phi(./lam)."""
    lam = np.sort(np.asarray(lam_list, float))
    if lam.size < 4 or decades(lam) < 3 - 1e-9:
        raise ValueError("lam_list must span at least three decades")
    if q < 2:
        raise ValueError("q must be at least 2")
    delta = half_radius(n)
    norms = np.array([homogeneous_norm(annulus_profile(n, l), s) for l in lam])
    weighted = np.array(list(map_fn(lambda l: weighted_floor(n, q, alpha, float(l), delta), lam)))
    nf = loglog_fit(lam, norms)
    wf = loglog_fit(lam, weighted)

    def margin(sel):
        if np.count_nonzero(sel) < 2:
            return wf.slope - nf.slope
        return loglog_fit(lam[sel], weighted[sel]).slope - loglog_fit(lam[sel], norms[sel]).slope

    return SharpnessReport(n, s, q, alpha, lam, norms, weighted, delta, nf, wf,
                           q * (n / 2 - s) - n, margin(lam >= 1), margin(lam <= 1), tol)
