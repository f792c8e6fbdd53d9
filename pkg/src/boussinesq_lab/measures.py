"""Discrete alpha-dimensional measures on [-1, 1], energies and maximal-ratio scans."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .fitting import PowerFit, loglog_fit
from .propagator import SpectralFunction, evolve_oracle, evolve_oracle_many
from .quadrature import panel_nodes
from .symbol import BOUSSINESQ, DispersionSymbol

MAX_DEPTH = 20


@dataclass(frozen=True)
class DiscreteMeasure:
    atoms: np.ndarray
    weights: np.ndarray
    r_min: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.atoms, float)
        w = np.asarray(self.weights, float)
        if a.shape != w.shape or a.ndim != 1 or a.size == 0:
            raise ValueError("atoms and weights must be matching nonempty 1-D arrays")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1) > 1e-12:
            raise ValueError("weights must sum to one")
        if np.any(np.abs(a) > 1):
            raise ValueError("atoms must lie in [-1, 1]")
        order = np.argsort(a, kind="stable")
        a, w = a[order], w[order]
        a.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "atoms", a)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.atoms.size

    def ball_mass(self, centers, r: float) -> np.ndarray:
        """mu(B(c, r)) for open balls."""
        c = np.asarray(centers, float)
        cw = np.concatenate([[0.0], np.cumsum(self.weights)])
        lo = np.searchsorted(self.atoms, c - r, side="right")
        hi = np.searchsorted(self.atoms, c + r, side="left")
        return cw[hi] - cw[lo]

    def to_csv(self) -> str:
        lines = ["atom,weight"] + [f"{a:.17g},{w:.17g}" for a, w in zip(self.atoms, self.weights)]
        return "\n".join(lines) + "\n"


def cantor_measure(ratio: float = 1 / 3, depth: int = 8) -> DiscreteMeasure:
    """Equal-weight atoms at the centres of the depth-level Cantor intervals, mapped to [-1, 1]."""
    if not (0 < ratio <= 0.5):
        raise ValueError("ratio must lie in (0, 1/2]")
    if not (0 <= depth <= MAX_DEPTH):
        raise ValueError(f"depth must lie in [0, {MAX_DEPTH}]")
    left = np.array([0.0])
    length = 1.0
    for _ in range(depth):
        nl = length * ratio
        left = np.concatenate([left, left + length - nl])
        length = nl
    centers = 2 * (left + length / 2) - 1
    n = centers.size
    alpha = np.log(2) / np.log(1 / ratio)
    return DiscreteMeasure(centers, np.full(n, 1.0 / n), 2 * length,
                           {"generator": "cantor", "ratio": ratio, "depth": depth, "alpha": alpha})


def uniform_measure(n: int = 4096) -> DiscreteMeasure:
    """dx/2 on [-1, 1] atomized at cell centres."""
    h = 2.0 / n
    x = -1 + h * (np.arange(n) + 0.5)
    return DiscreteMeasure(x, np.full(n, 1.0 / n), h, {"generator": "uniform", "n": n, "alpha": 1.0})


@dataclass(frozen=True)
class MeasureStats:
    alpha: float
    c_alpha: float
    I_alpha: float
    r_min: float
    radii: tuple


def dyadic_radii(r_min: float, r_max: float = 2.0) -> np.ndarray:
    j_hi = int(np.floor(np.log2(r_max) + 1e-12))
    j_lo = int(np.ceil(np.log2(r_min) - 1e-12))
    return 2.0 ** np.arange(j_lo, j_hi + 1)


def c_alpha(mu: DiscreteMeasure, alpha: float, radii=None) -> float:
    if radii is None:
        radii = dyadic_radii(mu.r_min)
    best = 0.0
    for r in radii:
        best = max(best, float(np.max(mu.ball_mass(mu.atoms, r))) * r ** (-alpha))
    return best


def cell_self_energy(width: float, alpha: float) -> float:
    """Mean of |x - y|^{-alpha} over two independent uniform points of one cell."""
    return 2.0 * width ** (-alpha) / ((1 - alpha) * (2 - alpha))


def energy(mu: DiscreteMeasure, alpha: float, chunk: int = 2048, diagonal: str = "exclude") -> float:
    """sum_{i != j} w_i w_j |x_i - x_j|^{-alpha}.

    ``diagonal="cell"`` adds each atom's own-cell energy w_i^2 E(cell), treating the
    atom as mass spread uniformly over a cell of width ``mu.r_min``.
    """
    x, w = mu.atoms, mu.weights
    total = 0.0
    for s in range(0, x.size, chunk):
        d = np.abs(x[s:s + chunk, None] - x[None, :])
        with np.errstate(divide="ignore"):
            k = d ** (-alpha) if alpha != 0 else np.ones_like(d)
        k[d == 0] = 0.0
        total += float(w[s:s + chunk] @ (k @ w))
    if diagonal == "cell":
        total += float(np.sum(w * w)) * cell_self_energy(mu.r_min, alpha)
    elif diagonal != "exclude":
        raise ValueError(f"unknown diagonal rule {diagonal!r}")
    return total


def measure_stats(mu: DiscreteMeasure, alpha: float, ball_family=None) -> MeasureStats:
    if not (0 < alpha <= 1):
        raise ValueError("alpha must lie in (0, 1]")
    radii = dyadic_radii(mu.r_min) if ball_family is None else np.asarray(ball_family, float)
    return MeasureStats(alpha, c_alpha(mu, alpha, radii), energy(mu, alpha), mu.r_min,
                        tuple(float(r) for r in radii))


@dataclass(frozen=True)
class EnergyBound:
    direct: float
    majorant: float
    c_alpha: float
    constant: float  # majorant <= constant * c_alpha

    @property
    def holds(self) -> bool:
        return self.direct <= self.majorant * (1 + 1e-12)


def dyadic_energy_bound(mu: DiscreteMeasure, s: float, alpha: float) -> EnergyBound:
    """Direct I_{1-2s} against int sum_j 2^{(j+1)(1-2s)} mu(B(y, 2^-j) minus {y}) d mu(y).

    The sum starts at j = -1 so that pairs at distance in [1, 2) are covered.
    """
    if not (0.25 <= s <= 0.5):
        raise ValueError("s must lie in [1/4, 1/2]")
    beta = 1 - 2 * s
    if not alpha > beta and s < 0.5:
        raise ValueError("need alpha > 1 - 2s")
    direct = energy(mu, beta)
    x, w = mu.atoms, mu.weights
    # smallest nonzero gap decides where the (self-excluded) ball masses vanish
    gaps = np.diff(x)
    gmin = gaps[gaps > 0].min() if np.any(gaps > 0) else 2.0
    j_max = int(np.ceil(-np.log2(gmin))) + 1
    maj = 0.0
    for j in range(-1, j_max + 1):
        m = mu.ball_mass(x, 2.0 ** -j) - w  # drop the atom itself
        maj += 2.0 ** ((j + 1) * beta) * float(w @ np.maximum(m, 0.0))
    ca = c_alpha(mu, alpha) if alpha > 0 else 1.0
    const = 2 ** beta * 2.0 ** (alpha - beta) / (1 - 2.0 ** (beta - alpha)) if alpha > beta else np.inf
    return EnergyBound(direct, maj, ca, float(const))


# maximal ratio ------------------------------------------------------------------

def hs_norm(f: SpectralFunction, s: float, panels: int = 512) -> float:
    """||f||_{H^s} = (int (1 + xi^2)^s |fhat|^2 d xi)^{1/2} over the support."""
    lo, hi = f.support
    cuts = sorted({lo, hi, *[b for b in f.breakpoints if lo < b < hi]})
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        x, w = panel_nodes(np.linspace(a, b, panels + 1), 8)
        total += float(np.sum((1 + x * x) ** s * np.abs(f(x)) ** 2 * w))
    return float(np.sqrt(total))


@dataclass(frozen=True)
class MaximalRatio:
    ratio: float
    numerator: float
    c_alpha: float
    norm: float
    sup_values: np.ndarray


def mu_maximal_ratio(f: SpectralFunction, mu: DiscreteMeasure, t_sequence, N_set, s: float,
                     alpha: Optional[float] = None, symbol: DispersionSymbol = BOUSSINESQ,
                     c_alpha_value: Optional[float] = None) -> MaximalRatio:
    """sum_i w_i max_{k,N} |B_{t_k}^N f(x_i)| / (sqrt(c_alpha) ||f||_{H^s})."""
    ts = list(t_sequence)
    Ns = list(N_set)
    if not ts or not Ns:
        raise ValueError("empty t or N set")
    alpha = mu.meta.get("alpha") if alpha is None else alpha
    ca = c_alpha(mu, alpha) if c_alpha_value is None else c_alpha_value
    norm = hs_norm(f, s)
    if norm == 0:
        return MaximalRatio(0.0, 0.0, ca, 0.0, np.zeros(mu.size))
    vals = np.abs(evolve_oracle_many(f, mu.atoms, symbol, ts, [float(n) for n in Ns]))
    sup = vals.max(axis=1)
    num = float(mu.weights @ sup)
    return MaximalRatio(num / (np.sqrt(ca) * norm), num, ca, norm, sup)


# lower-bound scaling -----------------------------------------------------------

@dataclass(frozen=True)
class LowerBoundScan:
    N: np.ndarray
    lhs: np.ndarray
    norms: np.ndarray
    c_alpha: np.ndarray
    rhs: np.ndarray
    lhs_fit: PowerFit
    norm_fit: PowerFit
    rhs_fit: PowerFit
    alpha: float
    s: float

    @property
    def ratio_slope(self) -> float:
        return self.lhs_fit.slope - self.rhs_fit.slope


def indicator_norm(N: float, s: float, panels: int = 256) -> float:
    """(int_{-N}^{N} (1 + xi^2)^s d xi)^{1/2}."""
    x, w = panel_nodes(np.linspace(0.0, N, panels + 1), 10)
    return float(np.sqrt(2 * np.sum((1 + x * x) ** s * w)))


def box_c_alpha(N: float, alpha: float, n_r: int = 64, n_x: int = 257) -> float:
    """Ball scan of c_alpha for mu = N chi_{(-1/N, 1/N)} dx."""
    rad = np.geomspace(1e-3 / N, 2.0, n_r)
    xs = np.linspace(-2.0 / N, 2.0 / N, n_x)
    best = 0.0
    for r in rad:
        overlap = np.clip(np.minimum(xs + r, 1 / N) - np.maximum(xs - r, -1 / N), 0, None)
        best = max(best, float(np.max(N * overlap)) * r ** (-alpha))
    return best


def lower_bound_scan(N_list, alpha: float, s: float, n_x: int = 32, per_decade: int = 16,
                     symbol: DispersionSymbol = BOUSSINESQ, map_fn=map) -> LowerBoundScan:
    """LHS = int sup_t |B_t^N f| d mu for fhat = chi_[-N, N], mu = N chi_(-1/N,1/N) dx."""
    N_arr = np.asarray(N_list, float)
    if N_arr.size < 4:
        raise ValueError("lower_bound_scan needs at least 4 values of N")
    if not np.allclose(np.log2(N_arr), np.round(np.log2(N_arr))):
        raise ValueError("N values must be dyadic")

    def one(N):
        f = SpectralFunction(lambda xi: np.ones(xi.shape, complex), (-N, N))
        t0 = N ** -2
        times = np.unique(np.concatenate([np.geomspace(t0 / 100, min(1.0, 100 * t0),
                                                       4 * per_decade + 1), [t0]]))
        xq, wq = panel_nodes(np.linspace(-1 / N, 1 / N, 5), n_x // 4)
        sup = np.zeros(xq.size)
        for t in times:
            np.maximum(sup, np.abs(evolve_oracle(f, xq, symbol, float(t), float(N))), out=sup)
        return float(N * np.sum(sup * wq))

    lhs = np.array(list(map_fn(one, N_arr)))
    norms = np.array([indicator_norm(N, s) for N in N_arr])
    ca = np.array([box_c_alpha(N, alpha) for N in N_arr])
    rhs = np.sqrt(ca) * norms
    return LowerBoundScan(N_arr, lhs, norms, ca, rhs, loglog_fit(N_arr, lhs),
                          loglog_fit(N_arr, norms), loglog_fit(N_arr, rhs), alpha, s)
