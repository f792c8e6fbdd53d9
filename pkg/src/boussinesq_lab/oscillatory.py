"""Oscillatory-kernel probes and van der Corput ratio checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

from .fitting import PowerFit, decades, loglog_fit
from .grid import cutoff
from .quadrature import oscillatory_edges, panel_nodes
from .symbol import BOUSSINESQ

TAU_MAX = 1.0 / 6.0


@dataclass(frozen=True)
class KernelProbe:
    d: float
    N: float
    s: float
    taus: np.ndarray
    values: np.ndarray

    @property
    def value(self) -> float:
        return float(self.values.max())

    @property
    def tau_star(self) -> float:
        return float(self.taus[int(np.argmax(self.values))])


def _kernel_integral(d: float, tau: float, N: float, s: float, near_panels: int = 32) -> complex:
    """int exp(i(d xi + tau Phi)) rho_N(xi)^2 |xi|^{-2s} d xi, folded onto xi >= 0."""
    p = 2 * s
    q = 1.0 / (1.0 - p)
    top = 2.0 * N
    split = min(1.0, top)
    # near zero: xi = u^q turns xi^{-p} d xi into q du
    ue = np.linspace(0.0, split ** (1 / q), near_panels + 1)
    u, wu = panel_nodes(ue, 8)
    xi = u ** q
    f = np.cos(d * xi) * np.exp(1j * tau * BOUSSINESQ.phi(xi)) * cutoff(xi / N) ** 2
    val = q * np.sum(f * wu)
    if top > split:
        edges = oscillatory_edges(
            split, top, lambda z: d + tau * BOUSSINESQ.dphi(z), max_width=0.25 * N + 0.25,
            breakpoints=(N,))
        x, w = panel_nodes(edges, 10)
        g = np.cos(d * x) * np.exp(1j * tau * BOUSSINESQ.phi(x)) * cutoff(x / N) ** 2 * x ** (-p)
        val += np.sum(g * w)
    return complex(2 * val)


def adversarial_taus(d: float, N: float, n_log: int = 40, n_stat: int = 20) -> np.ndarray:
    """Log grid in (1e-6, 1/6), the case-boundary tau = 2 d^2, and tau placing the
    stationary point of d xi - tau Phi(xi) at xi0 in [1, 2N]."""
    taus = list(np.geomspace(1e-6, TAU_MAX * 0.999, n_log))
    taus.append(2 * d * d)
    for xi0 in np.geomspace(1.0, 2 * N, n_stat):
        taus.append(d / float(BOUSSINESQ.dphi(xi0)))
    taus = np.array([t for t in taus if 0 < t < TAU_MAX])
    return np.unique(taus)


def kernel_probe(d: float, tau_samples=None, N: float = 8.0, s: float = 0.25,
                 near_panels: int = 32) -> KernelProbe:
    """sup over tau of |int exp(i(d xi + tau Phi)) rho_N^2 |xi|^{-2s} d xi|."""
    if d == 0:
        raise ValueError("separation d must be nonzero")
    if not N > 1:
        raise ValueError("truncation N must exceed 1")
    if not (0.25 <= s < 0.5):
        raise ValueError("order s must lie in [1/4, 1/2)")
    d = abs(float(d))  # the folded integrand is even in d
    taus = adversarial_taus(d, N) if tau_samples is None else np.asarray(tau_samples, float)
    if np.any((taus <= 0) | (taus >= TAU_MAX)):
        raise ValueError("tau samples must lie in (0, 1/6)")
    vals = np.array([abs(_kernel_integral(d, t, N, s, near_panels)) for t in taus])
    return KernelProbe(d, N, s, taus, vals)


@dataclass(frozen=True)
class DecayFit:
    fit: PowerFit
    envelope: float  # max_d probe(d) * d^{1-2s}
    predicted: float  # -(1 - 2s)

    @property
    def slope(self) -> float:
        return self.fit.slope


def decay_fit(probes: Sequence[KernelProbe], s: Optional[float] = None) -> DecayFit:
    if len(probes) < 8:
        raise ValueError("decay_fit needs at least 8 probes")
    d = np.array([p.d for p in probes])
    if decades(d) < 2 - 1e-9:
        raise ValueError("probes must span at least two decades of d")
    y = np.array([p.value for p in probes])
    s = probes[0].s if s is None else s
    pred = -(1 - 2 * s)
    return DecayFit(loglog_fit(d, y), float(np.max(y * d ** (-pred))), pred)


def fit_values(d, values, s: float) -> DecayFit:
    d = np.asarray(d, float)
    y = np.asarray(values, float)
    pred = -(1 - 2 * s)
    return DecayFit(loglog_fit(d, y), float(np.max(y * d ** (-pred))), pred)


@dataclass(frozen=True)
class KernelSweep:
    s: float
    d: np.ndarray
    N_list: tuple
    probes: dict  # N -> list[KernelProbe]
    fits: dict  # N -> DecayFit
    envelope_fit: DecayFit  # fit of max over N

    @property
    def envelope_spread(self) -> float:
        c = [f.envelope for f in self.fits.values()]
        return float(max(c) / min(c))


def kernel_sweep(s: float, d_grid, N_list, map_fn=map) -> KernelSweep:
    d_grid = np.asarray(d_grid, float)
    jobs = [(float(d), float(N)) for N in N_list for d in d_grid]
    res = list(map_fn(lambda j: kernel_probe(j[0], None, j[1], s), jobs))
    probes = {float(N): res[i * len(d_grid):(i + 1) * len(d_grid)] for i, N in enumerate(N_list)}
    fits = {N: decay_fit(p, s) for N, p in probes.items()}
    env = np.max([[p.value for p in ps] for ps in probes.values()], axis=0)
    return KernelSweep(s, d_grid, tuple(float(n) for n in N_list), probes, fits,
                       fit_values(d_grid, env, s))


# van der Corput -------------------------------------------------------------

@dataclass(frozen=True)
class PhaseInstance:
    phi: Callable
    dphi: Callable
    ddphi: Callable
    label: str = ""


@dataclass(frozen=True)
class AmplitudeInstance:
    psi: Callable
    dpsi: Callable
    label: str = ""


class HypothesisViolation(ValueError):
    """Sampled phase does not satisfy the van der Corput hypotheses."""


def oscillatory_integral(phase: PhaseInstance, amp: AmplitudeInstance, a: float, b: float,
                         order: int = 12) -> complex:
    edges = oscillatory_edges(a, b, phase.dphi, max_phase=np.pi / 4, max_width=(b - a) / 8)
    x, w = panel_nodes(edges, order)
    return complex(np.sum(np.exp(1j * phase.phi(x)) * amp.psi(x) * w))


def vdc_check(phase: PhaseInstance, amp: AmplitudeInstance, interval, gamma: float,
              order: int, samples: int = 2001) -> float:
    """|int_I e^{i Phi} psi| gamma^{1/order} / (|psi(b)| + int_I |psi'|)."""
    a, b = map(float, interval)
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    xs = np.linspace(a, b, samples)
    if order == 1:
        d1 = phase.dphi(xs)
        if np.any(np.abs(d1) < gamma * (1 - 1e-12)):
            raise HypothesisViolation("|Phi'| drops below gamma")
        dd = np.diff(d1)
        if not (np.all(dd >= 0) or np.all(dd <= 0)):
            raise HypothesisViolation("Phi' is not monotone")
    else:
        if np.any(np.abs(phase.ddphi(xs)) < gamma * (1 - 1e-12)):
            raise HypothesisViolation("|Phi''| drops below gamma")
    num = abs(oscillatory_integral(phase, amp, a, b))
    edges = np.linspace(a, b, 257)
    x, w = panel_nodes(edges, 8)
    den = abs(complex(amp.psi(np.array([b]))[0])) + float(np.sum(np.abs(amp.dpsi(x)) * w))
    if num == 0:
        return 0.0
    return float(num * gamma ** (1.0 / order) / den)


def linear_phase(lam: float) -> PhaseInstance:
    return PhaseInstance(lambda x: lam * x, lambda x: lam + 0 * x, lambda x: 0 * x, f"linear({lam})")


def quadratic_phase(lam: float) -> PhaseInstance:
    return PhaseInstance(lambda x: lam * x * x, lambda x: 2 * lam * x, lambda x: 2 * lam + 0 * x,
                         f"quadratic({lam})")


def constant_amplitude(c: complex = 1.0) -> AmplitudeInstance:
    return AmplitudeInstance(lambda x: c + 0 * x, lambda x: 0 * x, f"const({c})")


def linear_closed_form(lam: float) -> complex:
    """int_0^1 e^{i lam x} dx."""
    return (np.exp(1j * lam) - 1) / (1j * lam)


def fresnel_closed_form(lam: float, a: float = 1.0, b: float = 2.0) -> complex:
    """int_a^b e^{i lam x^2} dx via Fresnel integrals."""
    k = np.sqrt(2 * lam / np.pi)
    Sb, Cb = special.fresnel(b * k)
    Sa, Ca = special.fresnel(a * k)
    return complex(np.sqrt(np.pi / (2 * lam)) * ((Cb - Ca) + 1j * (Sb - Sa)))


def random_vdc_instance(rng: np.random.Generator, order: int):
    """Random admissible (phase, amplitude, interval, gamma)."""
    a = rng.uniform(0.0, 1.0)
    b = a + rng.uniform(0.5, 3.0)
    lam = 10 ** rng.uniform(0, 3)
    c = rng.uniform(0.0, 2.0)
    if order == 1:
        phase = PhaseInstance(lambda x: lam * (x + c * x * x), lambda x: lam * (1 + 2 * c * x),
                              lambda x: 2 * lam * c + 0 * x, "poly1")
        gamma = lam * (1 + 2 * c * a)
    else:
        phase = PhaseInstance(lambda x: lam * (x * x + c * x ** 3), lambda x: lam * (2 * x + 3 * c * x * x),
                              lambda x: lam * (2 + 6 * c * x), "poly2")
        gamma = lam * (2 + 6 * c * a)
    k = 3
    om = rng.uniform(0, 6, k)
    th = rng.uniform(0, 2 * np.pi, k)
    amp_c = rng.standard_normal(k)
    off = rng.uniform(-1, 1)
    amp = AmplitudeInstance(
        lambda x: off + np.sum(amp_c * np.cos(np.multiply.outer(x, om) + th), axis=-1),
        lambda x: -np.sum(amp_c * om * np.sin(np.multiply.outer(x, om) + th), axis=-1),
        "trig")
    return phase, amp, (a, b), gamma


@dataclass(frozen=True)
class VdcSuite:
    ratios: dict  # order -> array
    constant: float
    closed_form_errors: dict
    skipped: int


def vdc_suite(rng: np.random.Generator, n: int = 50, lam_closed: float = 37.0) -> VdcSuite:
    ratios = {}
    skipped = 0
    for order in (1, 2):
        r = []
        while len(r) < n:
            inst = random_vdc_instance(rng, order)
            try:
                r.append(vdc_check(*inst, order=order))
            except HypothesisViolation:
                skipped += 1
        ratios[order] = np.array(r)
    lin = oscillatory_integral(linear_phase(lam_closed), constant_amplitude(), 0.0, 1.0)
    fre = oscillatory_integral(quadratic_phase(lam_closed), constant_amplitude(), 1.0, 2.0)
    errs = {
        "linear": abs(lin - linear_closed_form(lam_closed)),
        "fresnel": abs(fre - fresnel_closed_form(lam_closed)),
    }
    const = float(max(r.max() for r in ratios.values()))
    return VdcSuite(ratios, const, errs, skipped)
