import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from boussinesq_lab.grid import (GridError, SampledSignal, SobolevParams, Spectrum, band_split, cutoff,
                                 forward, from_json, inverse, smooth_step, sobolev_norm, to_csv, to_json,
                                 transform, x_grid, xi_grid)

complex_vals = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


def test_constant_signal_has_mass_at_zero():
    spec = forward(SampledSignal(2 * np.pi, np.ones(8)))
    k0 = np.argmin(np.abs(spec.xi))
    assert spec.xi[k0] == 0
    assert spec.coeffs[k0] == pytest.approx(2 * np.pi, rel=1e-14)
    assert np.max(np.abs(np.delete(spec.coeffs, k0))) < 1e-13


def test_single_mode_lands_on_xi_one():
    X, N = 2 * np.pi, 16
    spec = forward(SampledSignal.from_function(lambda x: np.exp(1j * x), X, N))
    k1 = np.argmin(np.abs(spec.xi - 1))
    # Riemann sum of int e^{-ix} e^{ix} dx over one period
    assert abs(spec.coeffs[k1] - 2 * np.pi) < 1e-13
    assert np.max(np.abs(np.delete(spec.coeffs, k1))) < 1e-13


def test_gaussian_transform_matches_closed_form():
    X, N = 40.0, 512
    spec = forward(SampledSignal.from_function(lambda x: np.exp(-x * x / 2), X, N))
    exact = np.sqrt(2 * np.pi) * np.exp(-spec.xi ** 2 / 2)
    assert np.max(np.abs(spec.coeffs - exact)) < 1e-13


def test_grids():
    assert x_grid(4.0, 8)[0] == -2.0
    assert np.allclose(np.diff(x_grid(4.0, 8)), 0.5)
    assert np.allclose(xi_grid(2 * np.pi, 8), np.arange(-4, 4))


@pytest.mark.parametrize("N", [6, 4, 12])
def test_bad_sizes_rejected(N):
    with pytest.raises(GridError):
        SampledSignal(1.0, np.zeros(N))


def test_nonfinite_rejected():
    v = np.zeros(8, complex)
    v[3] = np.nan
    with pytest.raises(GridError):
        SampledSignal(1.0, v)


def test_transform_dispatch():
    sig = SampledSignal(3.0, np.arange(8.0))
    spec = transform(sig, "forward")
    back = transform(spec, "inverse")
    assert np.allclose(back.values, sig.values, atol=1e-13)
    with pytest.raises(ValueError):
        transform(sig, "sideways")


@given(arrays(complex, 64, elements=complex_vals), st.floats(0.5, 100))
def test_roundtrip_and_parseval(vals, X):
    sig = SampledSignal(X, vals)
    spec = forward(sig)
    back = inverse(spec)
    scale = max(1.0, np.max(np.abs(vals)))
    assert np.max(np.abs(back.values - vals)) <= 1e-12 * scale
    lhs = sig.dx * np.sum(np.abs(vals) ** 2)
    rhs = spec.dxi * np.sum(np.abs(spec.coeffs) ** 2) / (2 * np.pi)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)


def test_homogeneous_indicator_norm():
    # int_1^2 xi^{1/2} d xi = (2^{3/2} - 1)/(3/2), evaluated on a fine grid
    X, N = 2 * np.pi * 4096 / 8, 2 ** 16  # dxi = 1/256, so 1 and 2 are grid points
    xi = xi_grid(X, N)
    c = ((xi >= 1) & (xi <= 2)).astype(complex)
    # trapezoid end corrections: halve the two endpoint samples
    c[np.isclose(xi, 1) | np.isclose(xi, 2)] = np.sqrt(0.5)
    val = sobolev_norm(Spectrum(X, c), SobolevParams(0.25, homogeneous=True))
    assert val == pytest.approx(1.1040610178208843, rel=1e-5)


def test_norm_s0_is_l2_and_homogeneous_in_scale(rng):
    c = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    spec = Spectrum(10.0, c)
    assert sobolev_norm(spec, SobolevParams(0.0)) == pytest.approx(np.sqrt(spec.dxi * np.sum(np.abs(c) ** 2)),
                                                                   rel=1e-14)
    assert sobolev_norm(spec.with_coeffs(3 * c), SobolevParams(0.7)) == pytest.approx(
        3 * sobolev_norm(spec, SobolevParams(0.7)), rel=1e-14)


def test_homogeneous_negative_order_needs_zero_mean():
    c = np.ones(16, complex)
    with pytest.raises(GridError):
        sobolev_norm(Spectrum(1.0, c), SobolevParams(-0.2, homogeneous=True))
    c = c.copy()
    c[8] = 0  # xi = 0 sits at index N/2
    assert sobolev_norm(Spectrum(1.0, c), SobolevParams(-0.2, homogeneous=True)) > 0


@given(st.floats(-1.0, 2.0), st.floats(-1.0, 2.0))
def test_sobolev_norm_monotone_in_s(s1, s2):
    rng = np.random.default_rng(1)
    spec = Spectrum(20.0, rng.standard_normal(32) + 0j)
    lo, hi = sorted((s1, s2))
    assert sobolev_norm(spec, SobolevParams(lo)) <= sobolev_norm(spec, SobolevParams(hi)) * (1 + 1e-12)


def test_smooth_step_and_cutoff():
    assert smooth_step(np.array([-1.0, 0.0]))[0] == 1 and smooth_step(np.array([1.0, 3.0]))[1] == 0
    assert smooth_step(np.array([0.5]))[0] == pytest.approx(0.5)
    xi = np.linspace(-3, 3, 601)
    c = cutoff(xi)
    assert np.all(c[np.abs(xi) <= 1] == 1) and np.all(c[np.abs(xi) >= 2] == 0)
    assert np.all((0 <= c) & (c <= 1))


def test_band_split_cases(rng):
    X, N = 2 * np.pi * 4, 64
    xi = xi_grid(X, N)
    low_only = Spectrum(X, (np.abs(xi) <= 1).astype(complex))
    assert np.all(band_split(low_only)[1].coeffs == 0)
    high_only = Spectrum(X, (np.abs(xi) >= 2).astype(complex))
    assert np.all(band_split(high_only)[0].coeffs == 0)
    ones = Spectrum(X, np.ones(N, complex))
    lo, hi = band_split(ones)
    assert np.array_equal(lo.coeffs + hi.coeffs, ones.coeffs)


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_band_split_linear(a, b):
    rng = np.random.default_rng(3)
    f = Spectrum(30.0, rng.standard_normal(64) + 1j * rng.standard_normal(64))
    g = Spectrum(30.0, rng.standard_normal(64) + 1j * rng.standard_normal(64))
    comb = band_split(f.with_coeffs(a * f.coeffs + b * g.coeffs))
    for part, pf, pg in zip(comb, band_split(f), band_split(g)):
        assert np.max(np.abs(part.coeffs - (a * pf.coeffs + b * pg.coeffs))) <= 1e-14 * 20


def test_serialization_roundtrip(rng):
    sig = SampledSignal(7.5, rng.standard_normal(16) + 1j * rng.standard_normal(16))
    back = from_json(to_json(sig))
    assert isinstance(back, SampledSignal) and np.array_equal(back.values, sig.values)
    spec = forward(sig)
    assert np.array_equal(from_json(to_json(spec)).coeffs, spec.coeffs)
    lines = to_csv(spec).splitlines()
    assert lines[0] == "xi,real,imag" and len(lines) == 17
    x0, re0, im0 = map(float, lines[1].split(","))
    assert x0 == spec.xi[0] and re0 + 1j * im0 == spec.coeffs[0]


def test_arrays_are_read_only():
    sig = SampledSignal(1.0, np.zeros(8))
    with pytest.raises(ValueError):
        sig.values[0] = 1
