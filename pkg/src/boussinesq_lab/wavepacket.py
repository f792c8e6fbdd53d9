"""Wave packets f_v(x) = exp(-i x / v^2) gcheck(x / v) and their Boussinesq evolution.

After substituting eta = v xi + 1/v the evolution becomes

    B_t f_v(x) = (2 pi)^{-1} int exp(i F(eta)) g(eta) d eta,
    F(eta) = C0 + C1 eta + C2 eta^2 + t h(|eta/v - 1/v^2|),

with a = 1/v^2, C0 = t a^2 - x a, C1 = (x - 2 t a)/v, C2 = t a and
h = Phi - xi^2 in [0, 1/2).  C0 reaches 1e18 for the deepest packets, so the
constant part is reduced modulo 2 pi in extended precision.

Four evaluation routes, each returning a value and a rigorous error bound:

* ``perturbative``: exp(i psi) ~ 1 with psi = C2 eta^2 - t q, exact at t = 0.
* ``dual``: Fresnel transform to the compact y-side of gcheck, with h frozen at 1/2.
* ``direct``: oscillation-aware Gauss-Legendre on the eta window.
* ``nonstationary``: value 0 with an integration-by-parts bound when |F'| stays large.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np
from scipy import integrate

from .quadrature import QuadratureBudgetError, oscillatory_edges, panel_nodes
from .symbol import excess, excess_deficit, focusing_time

TWO_PI = 2 * np.pi


class PhasePrecisionError(ArithmeticError):
    """Phase magnitude exceeds what the selected arithmetic can resolve."""


class TailInequalityError(RuntimeError):
    """The 1/100 tail threshold is not reachable within the table."""


# bump profiles -------------------------------------------------------------

def default_gcheck(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    m = np.abs(y) < 1
    out[m] = np.exp(-1.0 / (1.0 - y[m] ** 2))
    return out


PROFILES: dict[str, Callable] = {"default": default_gcheck}


@dataclass(frozen=True, eq=False)
class BumpProfile:
    """gcheck on (-1, 1) with its transform g tabulated on a uniform eta grid."""

    name: str
    gcheck: Callable
    deta: float
    g_table: np.ndarray = field(repr=False)
    dg_table: np.ndarray = field(repr=False)
    table_reach: float  # |eta| beyond which the table is roundoff noise
    tail_rate: float  # b in |g| <~ C exp(-b sqrt(eta))
    tail_const: float
    integral: float  # int g = 2 pi gcheck(0)
    L: float
    tail_at_L: float

    # derived constants
    @property
    def c0(self) -> float:
        """(1/4)|int g| as in the lower-bound argument (no 2 pi)."""
        return abs(self.integral) / 4

    @property
    def c0_fixed(self) -> float:
        """c0 / (2 pi): the floor in the prefactored convention."""
        return self.c0 / TWO_PI

    @property
    def v0(self) -> float:
        return 1.0 / (2 * self.L)

    @property
    def tail_margin(self) -> float:
        return abs(self.integral) / 100 - self.tail_at_L

    @property
    def n_half(self) -> int:
        return (self.g_table.size - 1) // 2

    @property
    def eta(self) -> np.ndarray:
        return (np.arange(self.g_table.size) - self.n_half) * self.deta

    def __call__(self, eta) -> np.ndarray:
        return self._interp(self.g_table, eta)

    def derivative(self, eta) -> np.ndarray:
        return self._interp(self.dg_table, eta)

    def _interp(self, table, eta):
        """8-point Lagrange interpolation; g is band-limited and heavily oversampled."""
        eta = np.asarray(eta, dtype=float)
        u = eta / self.deta + self.n_half
        i0 = np.floor(u).astype(np.int64) - 3
        frac = u - (i0 + 3)
        out = np.zeros(eta.shape)
        ok = (i0 >= 0) & (i0 + 7 < table.size)
        if not np.any(ok):
            return out
        f = frac[ok]
        base = i0[ok]
        acc = np.zeros(f.shape)
        nodes = np.arange(-3, 5)
        for j, nj in enumerate(nodes):
            w = np.ones_like(f)
            for k, nk in enumerate(nodes):
                if k != j:
                    w *= (f - nk) / (nj - nk)
            acc += w * table[base + j]
        out[ok] = acc
        return out

    # tails and moments
    def _beyond_table(self, R: float, power: int = 0) -> float:
        C, b = self.tail_const, self.tail_rate
        if power == 0:
            sR = np.sqrt(R)
            return 2 * C * np.exp(-b * sR) * 2 * (sR / b + 1 / b ** 2)
        val, _ = integrate.quad(lambda e: e ** power * C * np.exp(-b * np.sqrt(e)), R, np.inf)
        return 2 * val

    @lru_cache(maxsize=64)
    def tail(self, R: float) -> float:
        """Upper estimate of int_{|eta| >= R} |g|."""
        R = abs(float(R))
        reach = self.table_reach
        if R >= reach:
            return self._beyond_table(R)
        eta = self.eta
        m = (np.abs(eta) >= R) & (np.abs(eta) <= reach)
        return float(np.sum(np.abs(self.g_table[m])) * self.deta) + self._beyond_table(reach)

    @lru_cache(maxsize=8)
    def moment(self, power: int) -> float:
        eta = self.eta
        m = np.abs(eta) <= self.table_reach
        core = float(np.sum(np.abs(eta[m]) ** power * np.abs(self.g_table[m])) * self.deta)
        return core + self._beyond_table(self.table_reach, power)

    @cached_property
    def l1(self) -> float:
        return self.moment(0)

    @cached_property
    def dl1(self) -> float:
        m = np.abs(self.eta) <= self.table_reach
        # g' inherits the tail rate of g up to a polynomial factor; table part dominates
        return float(np.sum(np.abs(self.dg_table[m])) * self.deta) + self._beyond_table(self.table_reach)

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.g_table)))

    @lru_cache(maxsize=16)
    def window(self, tol: float) -> float:
        """Smallest table radius R with tail(R)/(2 pi) <= tol, capped at the table reach."""
        eta = self.eta
        pos = eta >= 0
        mag = np.abs(self.g_table[pos])[::-1]
        cum = 2 * np.cumsum(mag)[::-1] * self.deta + self._beyond_table(self.table_reach)
        radii = eta[pos]
        ok = (cum / TWO_PI <= tol) & (radii <= self.table_reach)
        if not np.any(ok):
            return self.table_reach
        return float(radii[np.argmax(ok)])

    def summary(self) -> dict:
        return {
            "profile": self.name,
            "gcheck0": float(self.gcheck(np.array([0.0]))[0]),
            "integral_g": self.integral,
            "L": self.L,
            "tail_at_L": self.tail_at_L,
            "tail_margin": self.tail_margin,
            "c0": self.c0,
            "c0_fixed": self.c0_fixed,
            "v0": self.v0,
            "table_spacing": self.deta,
            "table_reach": self.table_reach,
            "tail_rate": self.tail_rate,
        }


def _tabulate(gcheck, dy: float, P: int):
    y = (np.arange(P) - P // 2) * dy
    b = gcheck(y)
    G = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(b))) * dy
    dG = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(-1j * y * b))) * dy
    deta = TWO_PI / (P * dy)
    return G, dG, deta


@lru_cache(maxsize=4)
def make_bump(profile_choice: str = "default", dy: float = 2.0 ** -9, P: int = 2 ** 19) -> BumpProfile:
    """Tabulate g = FT(gcheck) and certify the 1/100 tail threshold L."""
    if profile_choice not in PROFILES:
        raise ValueError(f"unknown profile {profile_choice!r}")
    gc = PROFILES[profile_choice]
    G, dG, deta = _tabulate(gc, dy, P)
    # even real profile: g is real and even; keep a symmetric table of odd length
    g = np.real(G)
    dg = np.real(dG)
    half = P // 2
    g = np.concatenate([g, g[:1]])[: 2 * half + 1]
    g[-1] = g[0]
    dg = np.concatenate([dg, -dg[:1]])[: 2 * half + 1]
    dg[-1] = -dg[0]
    eta = (np.arange(g.size) - half) * deta
    integral = float(TWO_PI * gc(np.array([0.0]))[0])

    # envelope of |g| in blocks of one oscillation period and its noise floor
    block = max(8, int(round(TWO_PI / deta)))
    pos = g[half:]
    nb = pos.size // block
    env = np.abs(pos[: nb * block]).reshape(nb, block).max(axis=1)
    centers = (np.arange(nb) + 0.5) * block * deta
    noise = 1e3 * np.finfo(float).eps * np.abs(g).max()
    above = np.nonzero(env > noise)[0]
    reach_idx = above.max()
    reach = float(centers[reach_idx])
    fit_m = (centers >= reach / 10) & (centers <= reach) & (env > noise)
    A = np.vstack([np.sqrt(centers[fit_m]), np.ones(fit_m.sum())]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, np.log(env[fit_m]), rcond=None)
    b = -float(slope)
    # envelope constant: smallest C dominating every fitted block
    C = float(np.max(env[fit_m] * np.exp(b * np.sqrt(centers[fit_m]))))

    bump = BumpProfile(profile_choice, gc, deta, g, dg, reach, b, C, integral, 0.0, 0.0)
    # L: smallest tabulated radius with tail <= |int g| / 100
    target = abs(integral) / 100
    mag = np.abs(g[half:])
    cum = 2 * (np.cumsum(mag[::-1])[::-1]) * deta + bump._beyond_table(reach)
    ok = np.nonzero((cum <= target) & (eta[half:] <= reach))[0]
    if ok.size == 0:
        raise TailInequalityError("1/100 tail threshold not reached inside the table")
    iL = ok[0]
    L = float(eta[half + iL])
    tail_L = bump.tail(L)
    if tail_L > target:
        raise TailInequalityError("tail certification failed")
    object.__setattr__(bump, "L", L)
    object.__setattr__(bump, "tail_at_L", tail_L)
    return bump


# packets -------------------------------------------------------------------

@dataclass(frozen=True)
class WavePacket:
    v: float
    bump: BumpProfile

    def __post_init__(self):
        if not (0 < self.v < 1):
            raise ValueError("packet scale v must lie in (0, 1)")

    def f(self, x):
        x = np.asarray(x, dtype=float)
        v = self.v
        return np.exp(-1j * np.mod(x / v ** 2, TWO_PI)) * self.bump.gcheck(x / v)

    def fhat(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.v * self.bump(self.v * xi + 1 / self.v)

    def sobolev_norm(self, s: float) -> float:
        """||f_v||_{H^s} = (v int (1 + xi(eta)^2)^s g(eta)^2 d eta)^{1/2}, xi = eta/v - 1/v^2."""
        bump = self.bump
        eta = bump.eta
        m = np.abs(eta) <= bump.table_reach
        v = self.v
        xi = eta[m] / v - 1 / v ** 2
        w = (1 + xi * xi) ** s
        return float(np.sqrt(v * np.sum(w * bump.g_table[m] ** 2) * bump.deta))


@dataclass(frozen=True)
class PacketValue:
    value: complex
    error: float
    method: str

    @property
    def lower(self) -> float:
        return max(0.0, abs(self.value) - self.error)

    @property
    def upper(self) -> float:
        return abs(self.value) + self.error


@dataclass(frozen=True)
class _Coeffs:
    phase0: float  # C0 mod 2 pi
    C1: float
    C2: float
    dual_phase: float  # C0 + t/2 + pi/4 - C1^2/(4 C2) mod 2 pi (nan if C2 == 0)
    center: float  # -C1 / (2 C2) (nan if C2 == 0)


def _coeffs(v: float, x: float, t: float, precision: str) -> _Coeffs:
    if precision == "extended":
        with mpmath.workprec(256):
            V, Xm, T = mpmath.mpf(v), mpmath.mpf(x), mpmath.mpf(t)
            a = 1 / (V * V)
            C0 = T * a * a - Xm * a
            C1 = (Xm - 2 * T * a) / V
            C2 = T * a
            tp = 2 * mpmath.pi
            ph0 = float(mpmath.fmod(C0, tp))
            if C2 > 0:
                dph = C0 + T / 2 + mpmath.pi / 4 - C1 * C1 / (4 * C2)
                dual = float(mpmath.fmod(dph, tp))
                center = float(-C1 / (2 * C2))
            else:
                dual = center = float("nan")
            return _Coeffs(ph0, float(C1), float(C2), dual, center)
    if precision != "double":
        raise ValueError(f"unknown precision {precision!r}")
    a = 1.0 / (v * v)
    C0 = t * a * a - x * a
    C1 = (x - 2 * t * a) / v
    C2 = t * a
    eps = np.finfo(float).eps
    worst = max(abs(C0), abs(t * a * a), abs(x * a))
    if worst * eps > 1e-6:
        raise PhasePrecisionError(
            f"constant phase magnitude {worst:.3e} exceeds the double-precision budget "
            f"(v={v:.3e}, t={t:.3e}); use extended precision")
    if C2 > 0:
        dual = C0 + t / 2 + np.pi / 4 - C1 * C1 / (4 * C2)
        if abs(C1 * C1 / (4 * C2)) * eps > 1e-6:
            dual = float("nan")
        center = -C1 / (2 * C2)
    else:
        dual = center = float("nan")
    return _Coeffs(float(np.mod(C0, TWO_PI)), C1, C2, float(np.mod(dual, TWO_PI)), center)


@lru_cache(maxsize=256)
def _deficit_weight(bump: BumpProfile, v: float) -> float:
    """(2 pi)^{-1} int |1/2 - h(|xi(eta)|)| |g(eta)| d eta, plus the tail at h-deficit 1/2."""
    eta = bump.eta
    m = np.abs(eta) <= bump.table_reach
    xi = eta[m] / v - 1 / v ** 2
    core = np.sum(excess_deficit(xi) * np.abs(bump.g_table[m])) * bump.deta
    return float((core + 0.5 * bump._beyond_table(bump.table_reach)) / TWO_PI)


def _abs_linear_integral(c1: float, c2: float, lo: float, hi: float) -> float:
    """int_lo^hi |c1 + 2 c2 eta| d eta."""
    if c2 == 0:
        return abs(c1) * (hi - lo)
    r = -c1 / (2 * c2)

    def prim(e):  # antiderivative of (c1 + 2 c2 eta)
        return c1 * e + c2 * e * e

    if r <= lo or r >= hi:
        return abs(prim(hi) - prim(lo))
    return abs(prim(r) - prim(lo)) + abs(prim(hi) - prim(r))


@dataclass(frozen=True)
class PacketEngine:
    """Evaluation settings shared by all packet evaluations."""

    bump: BumpProfile
    precision: str = "extended"
    tol: float = 1e-11
    accept_tol: float = 1e-9
    max_bound: float = 1e-3
    max_nodes: int = 2_000_000
    order: int = 8

    def evaluate(self, v: float, x: float, t: float) -> PacketValue:
        bump = self.bump
        if not v > 0:
            raise ValueError("v must be positive")
        if t < 0:
            raise ValueError("packet evolution is evaluated for t >= 0")
        co = _coeffs(v, x, t, self.precision)
        C1, C2 = co.C1, co.C2
        qv = _deficit_weight(bump, v)

        # perturbative: exact at t = 0, cheap whenever C2 and t are small
        pert_err = C2 * bump.moment(2) / TWO_PI + t * qv
        pert = PacketValue(
            complex(np.exp(1j * (co.phase0 + t / 2)) * bump.gcheck(np.array([C1]))[0]),
            pert_err, "perturbative")
        if pert_err <= self.tol:
            return pert

        R = bump.window(self.tol / 10)
        tail_err = bump.tail(R) / TWO_PI
        # (cost in nodes, error estimate, route)
        options = [(0.0, pert_err, "perturbative")]
        if C2 > 0 and np.isfinite(co.dual_phase):
            var_y = _abs_linear_integral(-C1 / (2 * C2), -1 / (4 * C2), -1.0, 1.0)
            nodes_y = (var_y / (np.pi / 2) + 16) * self.order
            if nodes_y <= self.max_nodes:
                options.append((nodes_y, t * qv, "dual"))
        var_eta = _abs_linear_integral(C1, C2, -R, R) + 2 * R * t / v
        nodes_eta = (var_eta / (np.pi / 2) + 2 * R) * self.order
        if nodes_eta <= self.max_nodes:
            options.append((nodes_eta, tail_err + self._roundoff(C1, C2, t, R), "direct"))
        options.sort()
        chosen = None
        for limit in (self.tol, self.accept_tol):
            ok = [o for o in options if o[1] <= limit]
            if ok:
                chosen = ok[0][2]
                break
        routes = {
            "perturbative": lambda: pert,
            "dual": lambda: self._dual(co, t, qv),
            "direct": lambda: self._direct(co, v, t, R, tail_err),
        }
        if chosen is not None:
            return routes[chosen]()
        # nothing meets accept_tol: take the smallest certified error on offer
        cands = [self._nonstationary(co, v, t, R, tail_err)]
        cands.append(routes[min(options, key=lambda o: o[1])[2]]())
        best = min(cands, key=lambda p: p.error)
        if not np.isfinite(best.error) or best.error > self.max_bound:
            raise QuadratureBudgetError(
                f"packet v={v:.3e} x={x:.4g} t={t:.3e}: no route within budget "
                f"(direct needs {nodes_eta:.3g} nodes, best bound {best.error:.3g})")
        return best

    def _roundoff(self, C1, C2, t, R) -> float:
        """Phase rounding over the window, propagated through int |g|."""
        span = abs(C1) * R + C2 * R * R + t
        return 8 * np.finfo(float).eps * span * self.bump.l1 / TWO_PI

    def _direct(self, co: _Coeffs, v, t, R, tail_err) -> PacketValue:
        C1, C2 = co.C1, co.C2
        kink = 1.0 / v
        edges = oscillatory_edges(
            -R, R, lambda e: np.abs(C1 + 2 * C2 * e) + t / v,
            breakpoints=(kink,) if -R < kink < R else (), max_width=0.5,
            max_panels=self.max_nodes // self.order + 1)
        eta, w = panel_nodes(edges, self.order)
        h = excess(eta / v - 1.0 / (v * v))
        ph = C1 * eta + C2 * eta * eta + t * h
        val = np.sum(np.exp(1j * ph) * self.bump(eta) * w)
        val = complex(np.exp(1j * co.phase0) * val / TWO_PI)
        err = tail_err + self._roundoff(C1, C2, t, R) + 1e-14 * abs(val)
        return PacketValue(val, err, "direct")

    def _dual(self, co: _Coeffs, t, qv) -> PacketValue:
        C1, C2 = co.C1, co.C2
        alpha = C1 / (2 * C2)
        beta = 1.0 / (4 * C2)
        edges = oscillatory_edges(
            -1.0, 1.0, lambda y: np.abs(alpha - 2 * beta * y),
            max_width=0.125, max_panels=self.max_nodes // self.order + 1)
        y, w = panel_nodes(edges, self.order)
        Iy = np.sum(self.bump.gcheck(y) * np.exp(1j * (alpha * y - beta * y * y)) * w)
        val = np.exp(1j * co.dual_phase) * np.sqrt(np.pi / C2) * Iy / TWO_PI
        return PacketValue(complex(val), t * qv + 1e-14 * abs(val), "dual")

    def _nonstationary(self, co: _Coeffs, v, t, R, tail_err) -> PacketValue:
        """|int_W e^{iF} g| <= (|g(p)|+|g(q)|+||g'||_1)/gamma + ||g||_1 max|F''|/gamma^2 per piece."""
        C1, C2 = co.C1, co.C2
        bump = self.bump
        kink = 1.0 / v
        cuts = [-R] + ([kink] if -R < kink < R else []) + [R]
        fpp = 2 * C2 + 2 * t / (v * v)
        total = 0.0
        for p, q in zip(cuts[:-1], cuts[1:]):
            ends = np.array([abs(C1 + 2 * C2 * p), abs(C1 + 2 * C2 * q)])
            inside = C2 > 0 and p < co.center < q
            gamma = (0.0 if inside else ends.min()) - t / v
            if gamma <= 0:
                return PacketValue(0j, float("inf"), "nonstationary")
            gp = np.abs(bump(np.array([p, q]))).sum()
            total += (gp + bump.dl1) / gamma + bump.l1 * fpp / gamma ** 2
        return PacketValue(0j, total / TWO_PI + tail_err, "nonstationary")


@lru_cache(maxsize=8)
def default_engine(precision: str = "extended") -> PacketEngine:
    return PacketEngine(make_bump(), precision)


def packet_evolve_detail(bump: BumpProfile, v: float, x: float, t: float,
                         precision: str = "extended", **kw) -> PacketValue:
    return PacketEngine(bump, precision, **kw).evaluate(v, x, t)


def packet_evolve(bump: BumpProfile, v: float, x: float, t: float,
                  precision: str = "extended", **kw) -> complex:
    """B_t f_v(x) in the prefactored convention."""
    return packet_evolve_detail(bump, v, x, t, precision, **kw).value


# constants and the recursive construction ------------------------------------

def floor_ratios(engine: PacketEngine, v_grid, x_grid) -> np.ndarray:
    """|B_{t(x)} f_v(x)| lower bounds divided by c0/(2 pi), shape (len(v), len(x))."""
    c = engine.bump.c0_fixed
    out = np.empty((len(v_grid), len(x_grid)))
    for i, v in enumerate(v_grid):
        for j, x in enumerate(x_grid):
            pv = engine.evaluate(v, x, focusing_time(x, v))
            out[i, j] = pv.lower / c
    return out


def calibrate_delta(engine: PacketEngine, v_grid=None, n_x: int = 24, max_level: int = 8) -> float:
    """Largest dyadic delta <= 1/4 such that the floor holds for x in (0, delta)."""
    bump = engine.bump
    if v_grid is None:
        v_grid = [bump.v0 / 2, bump.v0 / 4, bump.v0 / 8]
    for lev in range(2, max_level + 1):
        delta = 2.0 ** -lev
        xs = np.linspace(delta / n_x, delta, n_x, endpoint=False)
        if np.all(floor_ratios(engine, v_grid, xs) >= 1.0):
            return delta
    raise RuntimeError("no dyadic delta keeps the focusing floor")


@dataclass(frozen=True)
class CounterexampleSpec:
    s: float
    v1: float
    K: int
    delta: float

    def __post_init__(self):
        if not (0 < self.s < 0.25):
            raise ValueError("the construction needs 0 < s < 1/4")
        if self.K < 1:
            raise ValueError("depth K must be >= 1")
        if not (0 < self.delta <= 0.25):
            raise ValueError("delta must lie in (0, 1/4]")

    @property
    def eps(self) -> np.ndarray:
        return 2.0 ** -np.arange(1, self.K + 1)

    @property
    def v(self) -> list[float]:
        vs = [self.v1]
        for k in range(2, self.K + 1):
            vs.append(2.0 ** -k * vs[-1] ** 2)
        return vs

    @property
    def interval(self) -> tuple[float, float]:
        return (self.delta / 2, self.delta)

    def validate(self, bump: BumpProfile) -> None:
        if not (0 < self.v1 < min(bump.v0, self.delta / 4)):
            raise ValueError(
                f"v1={self.v1} must lie in (0, min(v0={bump.v0:.4g}, delta/4={self.delta / 4:.4g}))")


@dataclass(frozen=True)
class Certificate:
    v: tuple
    norms: tuple
    ratios: tuple  # ||f_vk|| / v_k^{1/2 - 2s}
    total: float
    tail_bound: float  # C sum_{k > K} 2^{-k(1/2 - 2s)}
    step_ratios: tuple  # ||f_{v_{k+1}}|| / ||f_{v_k}||

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.total) and np.isfinite(self.tail_bound))


def build_counterexample(spec: CounterexampleSpec, bump: Optional[BumpProfile] = None):
    """Packets f_{v_k}, k <= K, and the Sobolev certificate sum_k ||f_{v_k}||_{H^s}."""
    bump = bump or make_bump()
    spec.validate(bump)
    packets = [WavePacket(v, bump) for v in spec.v]
    norms = [p.sobolev_norm(spec.s) for p in packets]
    beta = 0.5 - 2 * spec.s
    ratios = [n / p.v ** beta for n, p in zip(norms, packets)]
    C = max(ratios)
    K = spec.K
    tail = C * 2.0 ** (-(K + 1) * beta) / (1 - 2.0 ** -beta)
    steps = tuple(norms[i + 1] / norms[i] for i in range(len(norms) - 1))
    cert = Certificate(tuple(spec.v), tuple(norms), tuple(ratios), float(sum(norms)), float(tail), steps)
    return packets, cert


@dataclass(frozen=True)
class WitnessRow:
    k: int
    x: float
    t: float
    value: complex
    lower: float
    own: float
    below: float  # sum over j < k of upper estimates
    above: float  # sum over j > k of upper estimates
    methods: str


@dataclass(frozen=True)
class WitnessReport:
    rows: tuple
    floor: float  # c0/2 in the prefactored convention
    min_by_k: dict
    below_by_k: dict
    above_by_k: dict

    @property
    def passed(self) -> bool:
        return all(m >= self.floor for m in self.min_by_k.values())

    @property
    def k0(self) -> Optional[int]:
        """Smallest k from which every later k passes."""
        ks = sorted(self.min_by_k)
        k0 = None
        for k in reversed(ks):
            if self.min_by_k[k] >= self.floor:
                k0 = k
            else:
                break
        return k0


def witness_row(engine: PacketEngine, vs: Sequence[float], k: int, x: float) -> WitnessRow:
    t = focusing_time(x, vs[k - 1])
    vals = [engine.evaluate(v, x, t) for v in vs]
    total = sum(p.value for p in vals)
    err = sum(p.error for p in vals)
    below = sum(p.upper for p in vals[: k - 1])
    above = sum(p.upper for p in vals[k:])
    return WitnessRow(k, x, t, complex(total), max(0.0, abs(total) - err),
                      abs(vals[k - 1].value), below, above,
                      "/".join(p.method for p in vals))


def divergence_witness(spec: CounterexampleSpec, k_range, x_samples, engine: Optional[PacketEngine] = None,
                       map_fn=map) -> WitnessReport:
    """|sum_j B_{t_k(x)} f_{v_j}(x)| lower bounds for each k and sampled x in (delta/2, delta)."""
    engine = engine or default_engine()
    spec.validate(engine.bump)
    vs = spec.v
    lo, hi = spec.interval
    xs = [float(x) for x in x_samples]
    if any(not (lo < x < hi) for x in xs):
        raise ValueError("witness samples must lie in the test interval")
    ks = [int(k) for k in k_range]
    if any(k < 1 or k > spec.K for k in ks):
        raise ValueError("k outside 1..K")
    jobs = [(k, x) for k in ks for x in xs]
    rows = tuple(map_fn(lambda kx: witness_row(engine, vs, kx[0], kx[1]), jobs))
    floor = engine.bump.c0_fixed / 2
    mins, below, above = {}, {}, {}
    for k in ks:
        rk = [r for r in rows if r.k == k]
        mins[k] = min(r.lower for r in rk) if rk else float("nan")
        below[k] = max(r.below for r in rk) if rk else float("nan")
        above[k] = max(r.above for r in rk) if rk else float("nan")
    return WitnessReport(rows, floor, mins, below, above)


# empirical packet constants --------------------------------------------------

@dataclass(frozen=True)
class SuiteReport:
    """Empirical packet constants.

    ``measured`` constants use |B_t f_v(x)|; ``certified`` ones use the evaluation's
    upper bound |value| + error.
    """
    sobolev_const: float
    dispersion_const: float  # sup |B| sqrt(t) / v
    arrival_const: float  # sup |B| v^4 / t
    dispersion_certified: float
    arrival_certified: float
    dispersion_at: tuple
    arrival_at: tuple
    evaluations: int
    methods: dict

    def constants(self) -> dict:
        return {"sobolev": self.sobolev_const, "dispersion": self.dispersion_const,
                "arrival": self.arrival_const}


def suite_time_grid(per_decade: int, t_min: float = 1e-9, t_max: float = 0.5) -> np.ndarray:
    k = int(round(np.log10(t_max / t_min) * per_decade))
    return np.geomspace(t_min, t_max, k + 1)


def packet_bound_suite(engine: PacketEngine, v_grid, t_grid, x_grid, s: float = 0.2,
                       map_fn=map, focus_offsets=(-0.02, -0.005, 0.0, 0.005, 0.02)) -> SuiteReport:
    """Empirical constants for the H^s packet bound, the dispersion decay and the arrival bound.

    Each (v, x) pair also gets times around its focusing time, where |B_t f_v(x)| peaks.
    """
    bump = engine.bump
    beta = 0.5 - 2 * s
    sob = max(WavePacket(float(v), bump).sobolev_norm(s) / v ** beta for v in v_grid)
    jobs = []
    for v in v_grid:
        for x in x_grid:
            ts = list(t_grid)
            tf = focusing_time(float(x), float(v))
            ts += [tf * (1 + o) for o in focus_offsets if 0 < tf * (1 + o) < 1]
            jobs += [(float(v), float(t), float(x)) for t in ts]
    vals = list(map_fn(lambda j: engine.evaluate(j[0], j[2], j[1]), jobs))
    best = {"d": (-1.0, ()), "a": (-1.0, ()), "dc": -1.0, "ac": -1.0}
    methods: dict = {}
    for (v, t, x), pv in zip(jobs, vals):
        methods[pv.method] = methods.get(pv.method, 0) + 1
        mag = abs(pv.value)
        d, a = np.sqrt(t) / v, v ** 4 / t
        if mag * d > best["d"][0]:
            best["d"] = (mag * d, (v, t, x))
        if mag * a > best["a"][0]:
            best["a"] = (mag * a, (v, t, x))
        best["dc"] = max(best["dc"], pv.upper * d)
        best["ac"] = max(best["ac"], pv.upper * a)
    return SuiteReport(float(sob), float(best["d"][0]), float(best["a"][0]), float(best["dc"]),
                       float(best["ac"]), best["d"][1], best["a"][1], len(jobs), methods)


def suite_stability(coarse: SuiteReport, fine: SuiteReport) -> dict:
    """max(a, b) / min(a, b) for each measured constant under grid refinement."""
    out = {}
    for k, a in coarse.constants().items():
        b = fine.constants()[k]
        out[k] = float(max(a, b) / min(a, b)) if min(a, b) > 0 else float("inf")
    return out
