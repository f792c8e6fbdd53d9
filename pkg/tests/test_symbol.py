import numpy as np
import pytest
from hypothesis import given, strategies as st

from boussinesq_lab.symbol import (BOUSSINESQ, SCHRODINGER, DispersionSymbol, NoStationaryPoint, excess,
                                   excess_deficit, focusing_time, stationary_point, symbol_eval)


def test_values_at_zero_and_one():
    assert [float(v) for v in symbol_eval(BOUSSINESQ, 0.0)] == [0.0, 1.0, 0.0]
    phi, d1, d2 = symbol_eval(BOUSSINESQ, 1.0)
    assert phi == pytest.approx(np.sqrt(2), rel=1e-15)
    assert d1 == pytest.approx(2.1213203435596424, rel=1e-15)
    assert d2 == pytest.approx(1.7677669529663687, rel=1e-15)


def test_large_argument_comparability():
    assert abs(BOUSSINESQ.phi(1e3) - 1e6) <= 1
    xi = np.geomspace(1, 1e150, 500)
    assert np.all(np.abs(excess(xi)) <= 1)
    assert np.all(np.isfinite(BOUSSINESQ.dphi(xi)))


def test_schrodinger_and_unknown_kind():
    assert SCHRODINGER.phi(3.0) == 9.0 and SCHRODINGER.dphi(3.0) == 6.0
    with pytest.raises(ValueError):
        DispersionSymbol("airy")


def test_even_extension():
    xi = np.linspace(-20, 20, 401)
    assert np.array_equal(BOUSSINESQ.phi(xi), BOUSSINESQ.phi(-xi))
    assert np.array_equal(BOUSSINESQ.dphi(xi[xi != 0]), -BOUSSINESQ.dphi(-xi[xi != 0]))


def test_derivatives_match_finite_differences():
    rng = np.random.default_rng(5)
    xi = rng.uniform(-50, 50, 1000)
    xi = xi[np.abs(xi) > 1e-3]  # the kink at 0
    h = 1e-5
    fd1 = (BOUSSINESQ.phi(xi + h) - BOUSSINESQ.phi(xi - h)) / (2 * h)
    fd2 = (BOUSSINESQ.dphi(xi + h) - BOUSSINESQ.dphi(xi - h)) / (2 * h)
    assert np.max(np.abs(fd1 / BOUSSINESQ.dphi(xi) - 1)) < 1e-6
    assert np.max(np.abs(fd2 / BOUSSINESQ.ddphi(xi) - 1)) < 1e-6


def test_dphi_strictly_increasing():
    xi = np.linspace(1e-6, 1e3, 200001)
    assert np.all(np.diff(BOUSSINESQ.dphi(xi)) > 0)
    assert np.all(BOUSSINESQ.ddphi(xi) > 0)


def test_excess_forms_agree():
    xi = np.linspace(0, 30, 301)
    direct = BOUSSINESQ.phi(xi) - xi ** 2
    assert np.max(np.abs(excess(xi) - direct)) < 1e-12
    assert np.allclose(excess_deficit(xi), 0.5 - excess(xi), atol=1e-15)
    big = np.array([1e4, 1e6])
    assert np.allclose(excess_deficit(big) * 8 * big ** 2, 1, rtol=1e-6)


def test_stationary_point_examples():
    assert stationary_point(BOUSSINESQ, 1.0) == 0.0
    assert stationary_point(BOUSSINESQ, 3 / np.sqrt(2)) == pytest.approx(1.0, rel=1e-12)
    # positive root of 4 xi^4 - 5 xi^2 - 8 = 0
    assert stationary_point(BOUSSINESQ, 3.0) == pytest.approx(1.4734872275003345634, rel=1e-12)
    with pytest.raises(NoStationaryPoint):
        stationary_point(BOUSSINESQ, 0.5)
    assert stationary_point(SCHRODINGER, 4.0) == 2.0


@given(st.floats(0.0, 1e3))
def test_stationary_point_inverts_dphi(xi):
    slope = float(BOUSSINESQ.dphi(xi))
    x0 = stationary_point(BOUSSINESQ, slope)
    assert abs(float(BOUSSINESQ.dphi(x0)) - slope) <= 1e-12 * slope
    if xi > 1e-2:  # Phi' is flat at 0, so only the residual is well conditioned there
        assert x0 == pytest.approx(xi, rel=1e-9)


def test_focusing_time():
    assert focusing_time(1.0, 1.0) == pytest.approx(np.sqrt(2) / 3, rel=1e-15)
    assert focusing_time(2.0, 1.0) == pytest.approx(2 * np.sqrt(2) / 3, rel=1e-15)
    # x / Phi'(100) for x = 1, v = 0.1
    assert focusing_time(1.0, 0.1) == pytest.approx(np.sqrt(10001) / 20001, rel=1e-12)
    assert focusing_time(0.1, 0.05) == pytest.approx(0.00012499999999938965225, rel=1e-12)
    with pytest.raises(ValueError):
        focusing_time(0.0, 0.1)


@given(st.floats(1e-3, 10), st.floats(1e-3, 1))
def test_focusing_time_inverts_group_velocity(x, v):
    t = focusing_time(x, v)
    assert t * float(BOUSSINESQ.dphi(1 / v ** 2)) == pytest.approx(x, rel=1e-12)
    assert t < x * v * v
