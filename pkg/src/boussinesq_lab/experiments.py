"""The eight verification experiments behind the command line."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import measures, oscillatory, radial, wavepacket
from .grid import SobolevParams, sobolev_norm
from .propagator import AliasingWarning, convergence_profile, evolve_oracle, random_bandlimited
from .reporting import (Check, ConfigError, ExperimentConfig, ExperimentResult, Field, Table, at_least,
                        build_config, in_range, nonempty, positive, stream_rng, worker_pool)
from .symbol import BOUSSINESQ

# slope windows stated for the kernel-decay check; other s need explicit bounds
KERNEL_SLOPE_WINDOWS = {0.25: (-0.6, -0.4), 0.4: (-0.7, -0.5)}


@dataclass(frozen=True)
class Context:
    config: ExperimentConfig
    map_fn: Callable

    @property
    def p(self) -> dict:
        return self.config.params

    def rng(self, stream: int) -> np.random.Generator:
        return stream_rng(self.config.seed, stream)


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


# convergence -------------------------------------------------------------------------

CONVERGENCE = {
    "s": Field("float", 0.25, in_range(0.0, 1.0)),
    "band": Field("float", 64.0, at_least(10.0)),
    "n_modes": Field("int", 8, at_least(1)),
    "k_min": Field("int", 1, at_least(0)),
    "k_max": Field("int", 20, at_least(2)),
    "X": Field("float", 256.0, positive),
    "N": Field("int", 8192, at_least(16)),
    "probe": Field("float", 1.0, positive),
    "oracle_points": Field("int", 33, at_least(2)),
}


def run_convergence(ctx: Context) -> ExperimentResult:
    p = ctx.p
    if p["k_max"] <= p["k_min"]:
        raise ConfigError("must exceed k_min", "k_max")
    f = random_bandlimited(ctx.rng(0), p["band"], p["n_modes"])
    spec = f.sample(p["X"], p["N"])
    ks = np.arange(p["k_min"], p["k_max"] + 1)
    times = 2.0 ** -ks
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AliasingWarning)
        prof = convergence_profile(spec, BOUSSINESQ, times, (-p["probe"], p["probe"]))
    hs = sobolev_norm(spec, SobolevParams(p["s"]))
    # oracle cross-check of the sup error at the three smallest times
    xq = np.linspace(-p["probe"], p["probe"], p["oracle_points"])
    f0 = evolve_oracle(f, xq, BOUSSINESQ, 0.0)
    gaps = []
    for t, e in zip(times[-3:], prof.errors[-3:]):
        eo = float(np.max(np.abs(evolve_oracle(f, xq, BOUSSINESQ, float(t)) - f0)))
        gaps.append(max(eo - e, 0.0))  # grid sup covers the oracle points up to grid error
    gap = max(gaps)
    final = float(prof.errors[-1])
    rows = [(int(k), float(t), float(e), float(b)) for k, t, e, b in zip(ks, times, prof.errors, prof.bounds)]
    checks = [
        Check("monotone-trend", prof.monotone_trend(),
              f"from t = {_fmt(times[min(prof.onset, times.size - 1)])}, rate {_fmt(prof.rate)}"),
        Check("final error <= 1e-2 ||f||_{H^s}", final <= 1e-2 * hs,
              f"{_fmt(final)} vs {_fmt(1e-2 * hs)}"),
        Check("error <= t Phi(K) ||fhat||_1 / (2 pi)", bool(np.all(prof.errors <= prof.bounds * (1 + 1e-9))),
              ""),
        Check("oracle cross-check", gap <= 1e-6 * max(hs, 1.0), f"excess {_fmt(gap)}"),
    ]
    return ExperimentResult(
        ctx.config, {"profile": Table(("k", "t", "sup_error", "bound"), rows)}, checks,
        {"rate": prof.rate, "onset_t": float(times[min(prof.onset, times.size - 1)]), "hs_norm": hs,
         "final_error": final, "oracle_excess": gap},
        sorted({str(w.message) for w in caught}), {"grid_N": p["N"], "grid_X": p["X"]})


# counterexample ----------------------------------------------------------------------

COUNTEREXAMPLE = {
    "s": Field("float", 0.2, in_range(0.0, 0.25, (False, False))),
    "K": Field("int", 3, in_range(1, 6)),
    "v1": Field("float", 1 / 64, positive),
    "delta": Field("float", 0.0, in_range(0.0, 0.25), help="0 calibrates the largest dyadic delta"),
    "n_x": Field("int", 12, at_least(1)),
    "suite_v": Field("floats", (2.0 ** -6, 2.0 ** -7), positive),
    "suite_per_decade": Field("int", 4, at_least(1)),
    "suite_n_x": Field("int", 4, at_least(1)),
}


def run_counterexample(ctx: Context) -> ExperimentResult:
    p = ctx.p
    engine = wavepacket.PacketEngine(wavepacket.make_bump(), ctx.config.precision)
    bump = engine.bump
    delta = p["delta"] or wavepacket.calibrate_delta(engine)
    spec = wavepacket.CounterexampleSpec(p["s"], p["v1"], p["K"], delta)
    try:
        spec.validate(bump)
    except ValueError as exc:
        raise ConfigError(str(exc), "v1") from None
    _, cert = wavepacket.build_counterexample(spec, bump)
    lo, hi = spec.interval
    xs = np.linspace(lo, hi, p["n_x"] + 2)[1:-1]
    rep = wavepacket.divergence_witness(spec, range(1, spec.K + 1), xs, engine, ctx.map_fn)
    vgrid = [bump.v0 / 2, bump.v0 / 4, bump.v0 / 8]
    floor = wavepacket.floor_ratios(engine, vgrid, np.linspace(delta / 24, delta, 24, endpoint=False))
    sx = np.linspace(lo, hi, p["suite_n_x"] + 2)[1:-1]
    suite = wavepacket.packet_bound_suite(engine, p["suite_v"], wavepacket.suite_time_grid(p["suite_per_decade"]),
                                          sx, spec.s, ctx.map_fn)
    c0_expected = 0.25 * abs(bump.integral)
    rows = [(r.k, r.x, r.t, abs(r.value), r.lower, rep.floor, r.lower >= rep.floor, r.below, r.above, r.methods)
            for r in rep.rows]
    cert_rows = [(k + 1, v, n, q) for k, (v, n, q) in enumerate(zip(cert.v, cert.norms, cert.ratios))]
    consts = suite.constants()
    checks = [
        Check("c0 = |int g| / 4", abs(bump.c0 - c0_expected) <= 1e-12 * c0_expected, _fmt(bump.c0)),
        Check("single-packet floor on the (v, x) grid", bool(np.all(floor >= 1.0)), f"min ratio {_fmt(floor.min())}"),
        Check("divergence witness >= c0/2", rep.passed, f"k0 {rep.k0}, min {_fmt(min(rep.min_by_k.values()))}"),
        Check("Sobolev certificate finite", cert.finite, f"total {_fmt(cert.total)}, tail {_fmt(cert.tail_bound)}"),
        Check("packet constants finite", all(np.isfinite(list(consts.values()))), ""),
    ]
    summary = {
        "bump": bump.summary(), "delta": delta, "v": list(spec.v), "k0": rep.k0, "floor": rep.floor,
        "min_by_k": rep.min_by_k, "below_by_k": rep.below_by_k, "above_by_k": rep.above_by_k,
        "certificate": {"norms": cert.norms, "ratios": cert.ratios, "total": cert.total,
                        "tail_bound": cert.tail_bound, "step_ratios": cert.step_ratios},
        "suite": {**consts, "dispersion_certified": suite.dispersion_certified,
                  "arrival_certified": suite.arrival_certified, "evaluations": suite.evaluations,
                  "methods": suite.methods},
    }
    budgets = {"precision": ctx.config.precision, "tol": engine.tol, "accept_tol": engine.accept_tol,
               "max_bound": engine.max_bound, "max_nodes": engine.max_nodes}
    return ExperimentResult(
        ctx.config,
        {"witness": Table(("k", "x", "t", "abs_value", "lower", "floor", "pass", "below", "above", "methods"), rows),
         "certificate": Table(("k", "v", "hs_norm", "ratio"), cert_rows)},
        checks, summary, [], budgets)


# kernel decay ------------------------------------------------------------------------

KERNEL = {
    "s": Field("float", 0.25, in_range(0.25, 0.5, (True, False))),
    "d_min": Field("float", 1e-3, positive),
    "d_max": Field("float", 1e-1, positive),
    "n_d": Field("int", 9, at_least(8)),
    "N_list": Field("floats", (2.0, 8.0, 32.0, 128.0), nonempty),
    "slope_lo": Field("float", float("nan")),
    "slope_hi": Field("float", float("nan")),
    "max_spread": Field("float", 2.0, positive),
}


def run_kernel(ctx: Context) -> ExperimentResult:
    p = ctx.p
    s = p["s"]
    lo, hi = p["slope_lo"], p["slope_hi"]
    if np.isnan(lo) or np.isnan(hi):
        if s not in KERNEL_SLOPE_WINDOWS:
            raise ConfigError("no default slope window for this s; set slope_lo and slope_hi", "s")
        lo, hi = KERNEL_SLOPE_WINDOWS[s]
    if p["d_max"] <= p["d_min"]:
        raise ConfigError("must exceed d_min", "d_max")
    d = np.geomspace(p["d_min"], p["d_max"], p["n_d"])
    sweep = oscillatory.kernel_sweep(s, d, p["N_list"], ctx.map_fn)
    rows = [(N, pr.d, pr.value, pr.tau_star) for N, ps in sweep.probes.items() for pr in ps]
    slope = sweep.envelope_fit.slope
    checks = [
        Check(f"fitted slope in [{lo}, {hi}]", lo <= slope <= hi, _fmt(slope)),
        Check(f"envelope spread across N <= {p['max_spread']}", sweep.envelope_spread <= p["max_spread"],
              _fmt(sweep.envelope_spread)),
    ]
    summary = {"slope": slope, "window": [lo, hi], "predicted": -(1 - 2 * s),
               "per_N": {str(N): {"slope": f.slope, "envelope": f.envelope} for N, f in sweep.fits.items()},
               "envelope_spread": sweep.envelope_spread}
    return ExperimentResult(ctx.config, {"probes": Table(("N", "d", "sup_tau", "tau_star"), rows)},
                            checks, summary)


# van der Corput ----------------------------------------------------------------------

VDC = {
    "n": Field("int", 50, at_least(1)),
    "lam_closed": Field("float", 37.0, positive),
    "closed_tol": Field("float", 1e-10, positive),
}


def run_vdc(ctx: Context) -> ExperimentResult:
    p = ctx.p
    res = oscillatory.vdc_suite(ctx.rng(0), p["n"], p["lam_closed"])
    rows = [(order, i, float(r)) for order, rs in res.ratios.items() for i, r in enumerate(rs)]
    checks = [Check("ratio constant finite", bool(np.isfinite(res.constant)), _fmt(res.constant))]
    for k, e in sorted(res.closed_form_errors.items()):
        checks.append(Check(f"{k} closed form", e <= p["closed_tol"], _fmt(e)))
    return ExperimentResult(ctx.config, {"ratios": Table(("order", "index", "ratio"), rows)}, checks,
                            {"constant": res.constant, "closed_form_errors": res.closed_form_errors,
                             "skipped": res.skipped})


# measure maximal ---------------------------------------------------------------------

MEASURE = {
    "ratio": Field("float", 1 / 3, in_range(0.0, 0.5, (False, True))),
    "depth": Field("int", 8, in_range(0, measures.MAX_DEPTH)),
    "s": Field("float", 0.25, in_range(0.25, 0.5)),
    "n_f": Field("int", 30, at_least(1)),
    "band": Field("float", 17.0, at_least(10.0)),
    "n_modes": Field("int", 6, at_least(1)),
    "k_max": Field("int", 10, at_least(1)),
    "N_set": Field("floats", (4.0, 16.0, 64.0), nonempty),
    "max_growth": Field("float", 0.05, positive),
    "uniform_atoms": Field("int", 4096, at_least(2)),
    "energy_tol": Field("float", 0.01, positive),
}


def run_measure(ctx: Context) -> ExperimentResult:
    p = ctx.p
    mu = measures.cantor_measure(p["ratio"], p["depth"])
    alpha = mu.meta["alpha"]
    ca = measures.c_alpha(mu, alpha)
    ts = 2.0 ** -np.arange(1, p["k_max"] + 1)
    ts2 = 2.0 ** -np.arange(1, 2 * p["k_max"] + 1)
    Ns = sorted(p["N_set"])
    Ns2 = sorted(set(Ns) | {2 * n for n in Ns} | {n / 2 for n in Ns if n / 2 > 1})

    def one(i):
        f = random_bandlimited(ctx.rng(i), p["band"], p["n_modes"])
        a = measures.mu_maximal_ratio(f, mu, ts, Ns, p["s"], alpha, c_alpha_value=ca)
        b = measures.mu_maximal_ratio(f, mu, ts2, Ns2, p["s"], alpha, c_alpha_value=ca)
        return a.ratio, b.ratio

    res = list(ctx.map_fn(one, range(p["n_f"])))
    rows = [(i, a, b, b / a - 1) for i, (a, b) in enumerate(res)]
    growth = max(r[3] for r in rows)
    uni = measures.uniform_measure(p["uniform_atoms"])
    exact = 4 * np.sqrt(2) / 3
    e_cell = measures.energy(uni, 0.5, diagonal="cell")
    e_excl = measures.energy(uni, 0.5)
    bounds = {"cantor": measures.dyadic_energy_bound(mu, p["s"], alpha),
              "uniform": measures.dyadic_energy_bound(uni, p["s"], 1.0)}
    checks = [
        Check("ratios finite", all(np.isfinite([a for a, _ in res] + [b for _, b in res])), f"max {_fmt(max(a for a, _ in res))}"),
        Check(f"saturation growth <= {p['max_growth']}", growth <= p["max_growth"], _fmt(growth)),
        Check("uniform I_{1/2} within tolerance (own-cell diagonal)", abs(e_cell / exact - 1) <= p["energy_tol"],
              f"{_fmt(e_cell)} vs {_fmt(exact)}; self-pairs excluded {_fmt(e_excl)}"),
    ]
    for name, b in bounds.items():
        checks.append(Check(f"dyadic majorant dominates ({name})", b.holds, f"{_fmt(b.direct)} <= {_fmt(b.majorant)}"))
    summary = {"alpha": alpha, "c_alpha": ca, "max_ratio": max(a for a, _ in res), "max_growth": growth,
               "uniform_energy": {"cell": e_cell, "excluded": e_excl, "exact": exact},
               "majorants": {k: {"direct": b.direct, "majorant": b.majorant, "constant": b.constant}
                             for k, b in bounds.items()}}
    return ExperimentResult(ctx.config, {"ratios": Table(("f", "ratio", "ratio_doubled", "growth"), rows)},
                            checks, summary)


# lower bound -------------------------------------------------------------------------

LOWER = {
    "N_list": Field("floats", tuple(2.0 ** np.arange(4, 10)), nonempty),
    "alpha": Field("float", 0.5, in_range(0.0, 1.0, (False, True))),
    "s": Field("float", 0.25, in_range(0.0, 0.5)),
    "min_slope": Field("float", 0.9),
    "slope_tol": Field("float", 0.05, positive),
}


def run_lower(ctx: Context) -> ExperimentResult:
    p = ctx.p
    try:
        scan = measures.lower_bound_scan(p["N_list"], p["alpha"], p["s"], map_fn=ctx.map_fn)
    except ValueError as exc:
        raise ConfigError(str(exc), "N_list") from None
    rows = [(N, a, b, c, d) for N, a, b, c, d in zip(scan.N, scan.lhs, scan.norms, scan.c_alpha, scan.rhs)]
    want = p["s"] + 0.5
    checks = [
        Check(f"LHS slope >= {p['min_slope']}", scan.lhs_fit.slope >= p["min_slope"], _fmt(scan.lhs_fit.slope)),
        Check(f"norm slope = s + 1/2 +- {p['slope_tol']}", abs(scan.norm_fit.slope - want) <= p["slope_tol"],
              _fmt(scan.norm_fit.slope)),
    ]
    return ExperimentResult(ctx.config, {"scan": Table(("N", "lhs", "hs_norm", "c_alpha", "rhs"), rows)}, checks,
                            {"lhs_slope": scan.lhs_fit.slope, "norm_slope": scan.norm_fit.slope,
                             "rhs_slope": scan.rhs_fit.slope, "ratio_slope": scan.ratio_slope})


# bessel ------------------------------------------------------------------------------

BESSEL = {
    "n_list": Field("ints", (2, 3), nonempty),
    "n_t": Field("int", 4000, at_least(100)),
    "max_slope": Field("float", -0.9),
    "closed_tol": Field("float", 1e-10, positive),
}


def run_bessel(ctx: Context) -> ExperimentResult:
    p = ctx.p
    if any(n < 2 for n in p["n_list"]):
        raise ConfigError("dimensions must be >= 2", "n_list")
    t = np.geomspace(1.0, 1e4, p["n_t"])
    r = np.geomspace(1e-3, 1e3, 4001)
    closed = max(float(np.max(np.abs(radial.bessel_j(m, r) - radial.half_integer_closed_form(m, r))))
                 for m in (0.5, 1.5))
    checks = [Check("half-integer closed forms", closed <= p["closed_tol"], _fmt(closed))]
    rows, summary = [], {"closed_form_error": closed, "dimensions": {}}
    for n in p["n_list"]:
        m = n / 2 - 1
        fit = radial.bessel_asymptotic_defect(n, t)
        seams = radial.seam_gaps(m)
        small = radial.small_argument_constant(m, np.geomspace(1e-6, 1.0, 200))
        small_fine = radial.small_argument_constant(m, np.geomspace(1e-6, 1.0, 2000))
        checks.append(Check(f"n={n} defect slope <= {p['max_slope']}", fit.slope <= p["max_slope"], _fmt(fit.slope)))
        checks.append(Check(f"n={n} branch seams agree", max(seams.values()) <= 1e-10, _fmt(max(seams.values()))))
        checks.append(Check(f"n={n} |J_m(r)| <= C r^m stable", abs(small_fine / small - 1) <= 0.01, _fmt(small_fine)))
        pair = radial.BesselPair(n)
        d = np.abs(np.sqrt(t) * radial.bessel_j(m, t) - pair.model(t))
        for tv, dv in zip(t[::max(1, p["n_t"] // 200)], d[::max(1, p["n_t"] // 200)]):
            rows.append((n, float(tv), float(dv)))
        summary["dimensions"][str(n)] = {"slope": fit.slope, "far_constant": fit.far_constant,
                                         "near_constant": fit.near_constant, "seams": seams,
                                         "small_argument_constant": small_fine}
    return ExperimentResult(ctx.config, {"defect": Table(("n", "t", "defect"), rows)}, checks, summary)


# radial sharpness --------------------------------------------------------------------

SHARPNESS = {
    "n": Field("int", 2, at_least(2)),
    "s": Field("float", 0.25, in_range(0.0, 0.5, (False, False))),
    "q": Field("float", 2.0, at_least(2.0)),
    "alpha": Field("str", "critical", help="a number, or critical for q(n/2 - s) - n"),
    "lam_min_exp": Field("int", -6),
    "lam_max_exp": Field("int", 6),
    "slope_tol": Field("float", 0.05, positive),
    "margin_tol": Field("float", 0.1, positive),
}


def run_sharpness(ctx: Context) -> ExperimentResult:
    p = ctx.p
    n, s, q = p["n"], p["s"], p["q"]
    if q > 2 / (1 - 2 * s) + 1e-12:
        raise ConfigError(f"must lie in [2, 2/(1-2s)] = [2, {2 / (1 - 2 * s):.6g}]", "q")
    crit = q * (n / 2 - s) - n
    try:
        alpha = crit if p["alpha"] == "critical" else float(p["alpha"])
    except ValueError:
        raise ConfigError("must be a number or 'critical'", "alpha") from None
    if alpha + n <= 0:
        raise ConfigError("alpha + n must be positive", "alpha")
    if p["lam_max_exp"] - p["lam_min_exp"] < 10:
        raise ConfigError("dyadic range must span at least three decades", "lam_max_exp")
    lam = 2.0 ** np.arange(p["lam_min_exp"], p["lam_max_exp"] + 1)
    rep = radial.sharpness_scan(n, s, q, alpha, lam, ctx.map_fn, p["margin_tol"])
    checks = [
        Check("norm slope n/2 + s", abs(rep.norm_fit.slope - rep.predicted_norm_slope) <= p["slope_tol"],
              f"{_fmt(rep.norm_fit.slope)} vs {_fmt(rep.predicted_norm_slope)}"),
        Check("weighted floor slope n - (alpha + n)/q",
              abs(rep.weighted_fit.slope - rep.predicted_weighted_slope) <= p["slope_tol"],
              f"{_fmt(rep.weighted_fit.slope)} vs {_fmt(rep.predicted_weighted_slope)}"),
        Check(f"equality margins <= {p['margin_tol']}", rep.verdict,
              f"large {_fmt(rep.margin_large)}, small {_fmt(rep.margin_small)}"),
    ]
    summary = {"alpha": alpha, "critical_alpha": crit, "delta": rep.delta,
               "norm_slope": rep.norm_fit.slope, "weighted_slope": rep.weighted_fit.slope,
               "margin_large": rep.margin_large, "margin_small": rep.margin_small, "verdict": rep.verdict}
    return ExperimentResult(ctx.config, {"scan": Table(("lambda", "norm", "weighted_norm"), rep.rows())},
                            checks, summary)


# registry ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Experiment:
    name: str
    schema: dict
    run: Callable[[Context], ExperimentResult]
    description: str


EXPERIMENTS = {e.name: e for e in [
    Experiment("convergence", CONVERGENCE, run_convergence, "sup |B_t f - f| along t_k = 2^-k"),
    Experiment("counterexample", COUNTEREXAMPLE, run_counterexample, "wave-packet divergence witness"),
    Experiment("kernel-decay", KERNEL, run_kernel, "decay of the truncated oscillatory kernel"),
    Experiment("vdc", VDC, run_vdc, "van der Corput ratio statistics"),
    Experiment("measure-maximal", MEASURE, run_measure, "maximal ratio against a Cantor measure"),
    Experiment("lower-bound", LOWER, run_lower, "lower-bound scaling in N"),
    Experiment("bessel", BESSEL, run_bessel, "Bessel evaluation and its two-exponential asymptotics"),
    Experiment("radial-sharpness", SHARPNESS, run_sharpness, "weighted radial sharpness scan"),
]}


def make_config(name: str, raw: dict | None = None, **kw) -> ExperimentConfig:
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}", "experiment")
    return build_config(name, EXPERIMENTS[name].schema, raw or {}, **kw)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    exp = EXPERIMENTS[config.name]
    with worker_pool(config.threads) as map_fn:
        return exp.run(Context(config, map_fn))
