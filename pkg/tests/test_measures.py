import numpy as np
import pytest
from hypothesis import given, strategies as st

from boussinesq_lab.measures import (DiscreteMeasure, box_c_alpha, c_alpha, cantor_measure, cell_self_energy,
                                     dyadic_energy_bound, dyadic_radii, energy, hs_norm, indicator_norm,
                                     lower_bound_scan, measure_stats, mu_maximal_ratio, uniform_measure)
from boussinesq_lab.propagator import gaussian_mixture, random_bandlimited


def test_cantor_depth_one():
    mu = cantor_measure(1 / 3, 1)
    assert np.allclose(mu.atoms, [-2 / 3, 2 / 3])
    assert mu.r_min == pytest.approx(2 / 3)
    assert mu.meta["alpha"] == pytest.approx(np.log(2) / np.log(3))
    assert energy(mu, 0.5) == pytest.approx(0.5 * (4 / 3) ** -0.5, rel=1e-15)


def test_uniform_energy_closed_form():
    # atoms at -3/4, -1/4, 1/4, 3/4 with weight 1/4
    expected = 0.125 * (3 * 0.5 ** -0.5 + 2 + 1.5 ** -0.5)
    assert energy(uniform_measure(4), 0.5) == pytest.approx(expected, rel=1e-15)
    assert expected == pytest.approx(0.88239215849, rel=1e-10)


def test_cell_energy_recovers_continuum():
    # I_alpha of dx/2 on [-1, 1] is 2^{1-alpha} / ((1 - alpha)(2 - alpha))
    exact = 2 ** 0.5 / (0.5 * 1.5)
    mu = uniform_measure(2048)
    assert energy(mu, 0.5, diagonal="cell") == pytest.approx(exact, rel=3e-3)
    assert energy(mu, 0.5) < energy(mu, 0.5, diagonal="cell")
    assert cell_self_energy(1.0, 0.5) == pytest.approx(2 / 0.75)
    with pytest.raises(ValueError):
        energy(mu, 0.5, diagonal="ignore")


def test_chunking_does_not_change_energy():
    mu = cantor_measure(1 / 3, 7)
    assert energy(mu, 0.4, chunk=17) == pytest.approx(energy(mu, 0.4), rel=1e-13)


def test_measure_validation():
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([0.0, 0.5]), np.array([0.5, 0.4]), 0.1)
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([0.0, 1.5]), np.array([0.5, 0.5]), 0.1)
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([0.0]), np.array([-1.0]), 0.1)
    with pytest.raises(ValueError):
        cantor_measure(0.7, 3)
    with pytest.raises(ValueError):
        cantor_measure(1 / 3, 30)
    with pytest.raises(ValueError):
        measure_stats(uniform_measure(8), 1.5)


def test_atoms_sorted_and_csv():
    mu = DiscreteMeasure(np.array([0.5, -0.5]), np.array([0.25, 0.75]), 1.0)
    assert np.array_equal(mu.atoms, [-0.5, 0.5]) and np.array_equal(mu.weights, [0.75, 0.25])
    assert mu.to_csv().splitlines() == ["atom,weight", "-0.5,0.75", "0.5,0.25"]


@given(st.integers(1, 8), st.floats(1e-3, 2.0), st.floats(1e-3, 2.0))
def test_ball_mass_monotone_in_radius(depth, r1, r2):
    mu = cantor_measure(1 / 3, depth)
    lo, hi = sorted((r1, r2))
    assert np.all(mu.ball_mass(mu.atoms, lo) <= mu.ball_mass(mu.atoms, hi) + 1e-15)
    assert np.all(mu.ball_mass(mu.atoms, 3.0) == pytest.approx(1.0))


@given(st.integers(2, 8))
def test_energy_reflection_invariant(depth):
    mu = cantor_measure(0.3, depth)
    ref = DiscreteMeasure(-mu.atoms, mu.weights, mu.r_min)
    assert energy(ref, 0.45) == pytest.approx(energy(mu, 0.45), rel=1e-12)


def test_c_alpha_of_self_similar_measure_is_bounded():
    alpha = np.log(2) / np.log(3)
    vals = [c_alpha(cantor_measure(1 / 3, d), alpha) for d in (4, 6, 8, 10, 12)]
    # dyadic radii sample the triadic structure unevenly, so c_alpha creeps up slowly
    assert max(vals) / min(vals) < 1.1
    assert np.array_equal(dyadic_radii(0.25, 2.0), [0.25, 0.5, 1.0, 2.0])


def test_box_c_alpha_scaling():
    # mu = N chi dx has mass 2 and ball masses ~ N r, so c_alpha ~ N^alpha
    a = box_c_alpha(64.0, 0.5) / box_c_alpha(16.0, 0.5)
    assert a == pytest.approx(2.0, rel=0.05)


def test_dyadic_majorant_dominates_energy():
    for mu, alpha in [(cantor_measure(1 / 3, 8), np.log(2) / np.log(3)), (uniform_measure(512), 1.0)]:
        b = dyadic_energy_bound(mu, 0.3, alpha)
        assert b.holds
        assert b.majorant <= b.constant * b.c_alpha
    with pytest.raises(ValueError):
        dyadic_energy_bound(uniform_measure(8), 0.2, 1.0)
    with pytest.raises(ValueError):
        dyadic_energy_bound(uniform_measure(8), 0.3, 0.3)


def test_hs_and_indicator_norms():
    assert hs_norm(gaussian_mixture([3.0], [1.0]), 0.3) == pytest.approx(1.8770896227432342147, rel=1e-12)
    assert indicator_norm(5.0, 1.0) == pytest.approx(9.6609178307929590491, rel=1e-13)
    # s = 0: plain length of [-N, N]
    assert indicator_norm(7.0, 0.0) == pytest.approx(np.sqrt(14.0), rel=1e-14)


def test_maximal_ratio_small(rng):
    f = random_bandlimited(rng, 16.0, decay=0.6)
    mu = cantor_measure(1 / 3, 5)
    r = mu_maximal_ratio(f, mu, [2.0 ** -k for k in range(1, 8)], [4.0, 16.0], 0.3)
    assert 0 < r.ratio < 1
    assert r.numerator == pytest.approx(mu.weights @ r.sup_values)
    with pytest.raises(ValueError):
        mu_maximal_ratio(f, mu, [], [4.0], 0.3)
    zero = mu_maximal_ratio(f.scaled(0.0), mu, [0.1], [4.0], 0.3)
    assert zero.ratio == 0.0


def test_lower_bound_scan_slope():
    scan = lower_bound_scan([4.0, 8.0, 16.0, 32.0], alpha=0.5, s=0.3, n_x=16, per_decade=8)
    # |B_t f| ~ N on a set of mass ~ 1, so the left side grows like N
    assert scan.lhs_fit.slope == pytest.approx(1.0, abs=0.05)
    assert scan.norm_fit.slope == pytest.approx(0.3 + 0.5, abs=0.05)
    assert scan.rhs_fit.slope == pytest.approx(scan.norm_fit.slope + 0.25, abs=0.05)
    with pytest.raises(ValueError):
        lower_bound_scan([4.0, 8.0, 16.0], 0.5, 0.3)
    with pytest.raises(ValueError):
        lower_bound_scan([4.0, 8.0, 16.0, 24.0], 0.5, 0.3)


def test_uniform_measure_ball_constant_is_one():
    # an interior ball of radius r carries mass r, so sup mu(B)/r -> 1
    assert c_alpha(uniform_measure(4096), 1.0) == pytest.approx(1.0, abs=1e-3)


def test_zero_exponent_energy_counts_off_diagonal_pairs():
    mu = cantor_measure(1 / 3, 6)
    b = dyadic_energy_bound(mu, 0.5, 0.5)
    assert b.direct == pytest.approx(1 - np.sum(mu.weights ** 2), rel=1e-14)
    assert b.holds
