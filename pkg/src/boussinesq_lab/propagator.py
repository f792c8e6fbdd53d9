"""Evolution operators B_t and B_t^N on uniform grids, plus a direct-quadrature oracle."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .fitting import PowerFit, loglog_fit
from .grid import SampledSignal, Spectrum, inverse, x_grid
from .quadrature import QuadratureBudgetError, oscillatory_edges, panel_nodes
from .symbol import BOUSSINESQ, DispersionSymbol


class AliasingWarning(UserWarning):
    """Spectrum carries non-negligible energy near the Nyquist edge."""


def psi(r):
    """Truncation profile psi(r) = exp(-r^2)."""
    r = np.asarray(r, dtype=float)
    return np.exp(-r * r)


@dataclass(frozen=True)
class SpectralFunction:
    """A frequency-side function fhat given by a callable with compact support."""

    fhat: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]
    breakpoints: tuple = ()

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        lo, hi = self.support
        out = np.zeros(xi.shape, dtype=complex)
        m = (xi >= lo) & (xi <= hi)
        out[m] = self.fhat(xi[m])
        return out

    def sample(self, X: float, N: int) -> Spectrum:
        return Spectrum.from_function(self, X, N)

    def scaled(self, c: complex) -> "SpectralFunction":
        f = self.fhat
        return SpectralFunction(lambda xi: c * f(xi), self.support, self.breakpoints)


def gaussian_mixture(centers, amps, sigma: float = 1.0, cut: float = 9.0) -> SpectralFunction:
    """Sum of amps_m exp(-(xi - c_m)^2 / (2 sigma^2)); support trimmed where tails < e^{-cut^2/2}."""
    centers = np.asarray(centers, dtype=float)
    amps = np.asarray(amps, dtype=complex)

    def fhat(xi):
        d = (xi[..., None] - centers) / sigma
        return np.exp(-0.5 * d * d) @ amps

    lo = float(centers.min() - cut * sigma)
    hi = float(centers.max() + cut * sigma)
    return SpectralFunction(fhat, (lo, hi))


def random_bandlimited(rng: np.random.Generator, band: float, n_modes: int = 8,
                       sigma: float = 1.0, decay: float = 0.0) -> SpectralFunction:
    """Random Gaussian mixture whose numerical support lies inside [-band, band].

    Amplitudes are complex normal scaled by (1 + c^2)^{-decay/2}.
    """
    cut = 9.0
    reach = band - cut * sigma
    if reach <= 0:
        raise ValueError("band too narrow for the bump width")
    centers = rng.uniform(-reach, reach, n_modes)
    amps = (rng.standard_normal(n_modes) + 1j * rng.standard_normal(n_modes))
    amps *= (1 + centers ** 2) ** (-decay / 2)
    return gaussian_mixture(centers, amps, sigma, cut)


@dataclass(frozen=True)
class EvolutionRequest:
    spectrum: Spectrum
    symbol: DispersionSymbol = BOUSSINESQ
    t: float = 0.0
    N: Optional[float] = None

    def __post_init__(self):
        if not np.isfinite(self.t):
            raise ValueError("evolution time must be finite")
        if self.N is not None and self.N < 1:
            raise ValueError("truncation level must be >= 1")


def multiplier(xi, symbol: DispersionSymbol, t: float, N: Optional[float] = None):
    m = np.exp(1j * t * symbol.phi(xi))
    if N is not None:
        m = m * psi(np.abs(xi) / N)
    return m


def band_edge_fraction(spec: Spectrum) -> float:
    e = np.abs(spec.coeffs) ** 2
    total = e.sum()
    if total == 0:
        return 0.0
    edge = spec.N // 16
    return float((e[:edge].sum() + e[-edge:].sum()) / total)


def evolve(req: EvolutionRequest) -> SampledSignal:
    spec = req.spectrum
    frac = band_edge_fraction(spec)
    if frac > 1e-8:
        warnings.warn(f"band edge carries {frac:.3g} of the energy; wrap-around possible",
                      AliasingWarning, stacklevel=2)
    out = spec.coeffs * multiplier(spec.xi, req.symbol, req.t, req.N)
    return inverse(spec.with_coeffs(out))


def evolve_spectrum(spec: Spectrum, symbol: DispersionSymbol, t: float,
                    N: Optional[float] = None) -> Spectrum:
    return spec.with_coeffs(spec.coeffs * multiplier(spec.xi, symbol, t, N))


def evolve_oracle(f: SpectralFunction, x, symbol: DispersionSymbol = BOUSSINESQ,
                  t: float = 0.0, N: Optional[float] = None, *, order: int = 8,
                  max_panels: int = 2_000_000, chunk: int = 256) -> np.ndarray:
    """(2 pi)^{-1} int exp(i x xi + i t Phi(xi)) psi(|xi|/N) fhat(xi) dxi by direct quadrature."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lo, hi = f.support
    if N is not None:
        # psi is below 1e-17 once |xi| > 6.3 N
        lo, hi = max(lo, -6.3 * N), min(hi, 6.3 * N)
    out = np.zeros(x.size, dtype=complex)
    if hi <= lo or x.size == 0:
        return out
    bps = tuple(f.breakpoints) + (0.0,)
    for s in range(0, x.size, chunk):
        xs = x[s:s + chunk]
        xmax = float(np.max(np.abs(xs)))
        edges = oscillatory_edges(
            lo, hi, lambda xi: xmax + abs(t) * np.abs(symbol.dphi(xi)),
            breakpoints=bps, max_panels=max_panels, max_width=1.0)
        nodes, w = panel_nodes(edges, order)
        amp = f(nodes) * w
        if N is not None:
            amp = amp * psi(np.abs(nodes) / N)
        amp = amp * np.exp(1j * t * symbol.phi(nodes))
        out[s:s + chunk] = np.exp(1j * np.outer(xs, nodes)) @ amp
    return out / (2 * np.pi)


def evolve_oracle_many(f: SpectralFunction, x, symbol: DispersionSymbol, times, Ns=None, *,
                       order: int = 8, max_panels: int = 2_000_000) -> np.ndarray:
    """Oracle values for every (t, N) pair at once, shape (len(x), len(times) * len(Ns)).

    One panel set sized for the largest |t| serves all pairs; columns run over N fastest.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    times = np.asarray(times, dtype=float)
    Ns = [None] if Ns is None else list(Ns)
    lo, hi = f.support
    finite = [n for n in Ns if n is not None]
    if finite and len(finite) == len(Ns):
        lo, hi = max(lo, -6.3 * max(finite)), min(hi, 6.3 * max(finite))
    tmax = float(np.max(np.abs(times)))
    xmax = float(np.max(np.abs(x)))
    edges = oscillatory_edges(lo, hi, lambda xi: xmax + tmax * np.abs(symbol.dphi(xi)),
                              breakpoints=tuple(f.breakpoints) + (0.0,), max_panels=max_panels,
                              max_width=1.0)
    nodes, w = panel_nodes(edges, order)
    amp = f(nodes) * w / (2 * np.pi)
    ph = symbol.phi(nodes)
    cols = []
    for t in times:
        base = amp * np.exp(1j * t * ph)
        for N in Ns:
            cols.append(base if N is None else base * psi(np.abs(nodes) / N))
    A = np.stack(cols, axis=1)
    out = np.empty((x.size, A.shape[1]), dtype=complex)
    for s in range(0, x.size, 256):
        out[s:s + 256] = np.exp(1j * np.outer(x[s:s + 256], nodes)) @ A
    return out


# maximal scans ---------------------------------------------------------------

def log_time_grid(t_min: float = 1e-6, t_max: float = 1.0, per_decade: int = 64,
                  include=()) -> np.ndarray:
    n = max(2, int(round(np.log10(t_max / t_min) * per_decade)) + 1)
    g = np.concatenate([np.geomspace(t_min, t_max, n), np.asarray(include, dtype=float)])
    return np.unique(g)


def dyadic_times(k_max: int, k_min: int = 1) -> np.ndarray:
    """Default null sequence t_k = 2^{-k}, returned increasing."""
    return np.sort(2.0 ** -np.arange(k_min, k_max + 1))


@dataclass(frozen=True)
class MaximalScan:
    times: np.ndarray
    x: np.ndarray
    sup: np.ndarray
    argmax: np.ndarray
    refined_sup: Optional[np.ndarray] = None
    refined_time: Optional[np.ndarray] = None
    warnings: tuple = field(default=())

    @property
    def argmax_time(self) -> np.ndarray:
        return self.times[self.argmax]

    @property
    def refinement_gap(self) -> float:
        if self.refined_sup is None:
            return 0.0
        return float(np.max(self.refined_sup - self.sup))


def _point_values(spec: Spectrum, symbol, x, t, N):
    """B_t f at scattered (x_j, t_j) pairs by direct summation over the xi grid."""
    xi = spec.xi
    c = spec.coeffs * (psi(np.abs(xi) / N) if N is not None else 1.0) * spec.dxi / (2 * np.pi)
    ph = symbol.phi(xi)
    out = np.empty(len(x), dtype=complex)
    for s in range(0, len(x), 128):
        xs, ts = x[s:s + 128], t[s:s + 128]
        out[s:s + 128] = np.exp(1j * (np.outer(xs, xi) + np.outer(ts, ph))) @ c
    return out


def maximal_scan(spec: Spectrum, symbol: DispersionSymbol, time_grid, N: Optional[float] = None,
                 *, refine: bool = False, points: Optional[np.ndarray] = None,
                 refine_iters: int = 40) -> MaximalScan:
    """Pointwise max over the time grid of |B_t^N f| on the spatial grid.

    ``points`` selects a subset of grid indices.  With ``refine`` a golden-section
    search between the neighbours of each argmax records how much the grid misses.
    """
    times = np.asarray(time_grid, dtype=float)
    if times.size == 0:
        raise ValueError("empty time grid")
    if np.any(np.diff(times) <= 0):
        times = np.unique(times)
    x = x_grid(spec.X, spec.N)
    idx = np.arange(spec.N) if points is None else np.asarray(points)
    best = np.full(idx.size, -1.0)
    arg = np.zeros(idx.size, dtype=np.int64)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AliasingWarning)
        for k, t in enumerate(times):
            vals = np.abs(evolve(EvolutionRequest(spec, symbol, float(t), N)).values[idx])
            upd = vals > best  # strict: ties keep the smaller time index
            best[upd] = vals[upd]
            arg[upd] = k
    warns = tuple(sorted({str(w.message) for w in caught}))
    xs = x[idx]
    if not refine:
        return MaximalScan(times, xs, best, arg, warnings=warns)
    lo = times[np.maximum(arg - 1, 0)]
    hi = times[np.minimum(arg + 1, times.size - 1)]
    gr = (np.sqrt(5) - 1) / 2
    a, b = lo.copy(), hi.copy()
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc = np.abs(_point_values(spec, symbol, xs, c, N))
    fd = np.abs(_point_values(spec, symbol, xs, d, N))
    for _ in range(refine_iters):
        left = fc > fd  # maximum bracketed by [a, d]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        keep = np.where(left, c, d)
        fkeep = np.where(left, fc, fd)
        p = np.where(left, b - gr * (b - a), a + gr * (b - a))
        fp = np.abs(_point_values(spec, symbol, xs, p, N))
        c = np.where(left, p, keep)
        fc = np.where(left, fp, fkeep)
        d = np.where(left, keep, p)
        fd = np.where(left, fkeep, fp)
    tref = np.where(fc > fd, c, d)
    fref = np.maximum(np.maximum(fc, fd), best)
    tref = np.where(fref > best, tref, times[arg])
    return MaximalScan(times, xs, best, arg, fref, tref, warns)


# convergence as t -> 0 ----------------------------------------------------

@dataclass(frozen=True)
class ConvergenceProfile:
    times: np.ndarray
    errors: np.ndarray
    bounds: np.ndarray
    fit: Optional[PowerFit]
    onset: int = 0  # first index with t Phi(K) <= 1, where the O(t) regime starts

    @property
    def rate(self) -> float:
        return float("nan") if self.fit is None else self.fit.slope

    def monotone_trend(self, min_points: int = 3) -> bool:
        """Errors decrease from the onset on, up to a 1% wobble.

        Before the onset the phase t Phi(xi) wraps around for part of the spectrum and
        the sup error is O(||f||) with no trend to detect.
        """
        e = self.errors[self.onset:]
        if e.size < min_points:
            return False
        return bool(np.all(e[1:] <= e[:-1] * 1.01 + 1e-300))


def convergence_profile(spec: Spectrum, symbol: DispersionSymbol, time_sequence,
                        probe_interval: tuple[float, float]) -> ConvergenceProfile:
    """sup over the probe interval of |B_t f - f| for each t of a decreasing sequence."""
    times = np.asarray(time_sequence, dtype=float)
    if np.any(np.diff(times) >= 0):
        raise ValueError("time sequence must be strictly decreasing")
    f0 = inverse(spec).values
    x = -(spec.X / 2) + np.arange(spec.N) * spec.X / spec.N
    m = (x >= probe_interval[0]) & (x <= probe_interval[1])
    l1 = spec.dxi * np.sum(np.abs(spec.coeffs)) / (2 * np.pi)
    K = np.max(np.abs(spec.xi[np.abs(spec.coeffs) > 0]), initial=0.0)
    amax = np.max(np.abs(spec.coeffs), initial=0.0)
    K_eff = np.max(np.abs(spec.xi[np.abs(spec.coeffs) > 1e-12 * amax]), initial=0.0)
    errs, bnds = [], []
    for t in times:
        ft = inverse(evolve_spectrum(spec, symbol, float(t))).values
        errs.append(float(np.max(np.abs(ft[m] - f0[m]), initial=0.0)))
        bnds.append(float(abs(t) * symbol.phi(K) * l1))
    errs = np.asarray(errs)
    late = np.nonzero(np.abs(times) * symbol.phi(K_eff) <= 1)[0]
    onset = int(late[0]) if late.size else times.size
    pos = (times > 0) & (errs > 0) & (np.arange(times.size) >= onset)
    fit = loglog_fit(times[pos], errs[pos]) if pos.sum() >= 2 else None
    return ConvergenceProfile(times, errs, np.asarray(bnds), fit, onset)
