import math
import warnings

import numpy as np
import pytest
from scipy import integrate as sp_integrate
from scipy import optimize

from conftest import make_protocol
from wignerxft.errors import HeavyTailWarning, InsufficientBinsError, InvalidInputError, PreconditionError
from wignerxft.heat import (
    AsymmetricLaplace,
    HeatHistogram,
    analytic_full_swap_pdf,
    characteristic_function,
    characteristic_function_pdf,
    clausius_check,
    delta_beta,
    heat_eigenvalues,
    histogram,
    is_full_swap,
    ks_distance,
    mgf_estimate,
    reverse_consistency,
    sample_heat,
    sample_reverse_heat,
    xft_fit,
)
from wignerxft.limits import tune_equal_beta
from wignerxft.states import OscillatorSpec, beta_omega, nu_thermal


def test_single_zero_sample_lands_right_of_zero():
    h = histogram(np.array([0.0]), bin_width=1.0, half_range=3.0)
    np.testing.assert_array_equal(h.bin_edges, [-3, -2, -1, 0, 1, 2, 3])
    np.testing.assert_array_equal(h.counts, [0, 0, 0, 1, 0, 0])


def test_mirrored_samples_fill_paired_bins(rng):
    q = rng.uniform(0, 5, 1000)
    h = histogram(np.concatenate([q, -q]), bin_width=0.25, half_range=5.0)
    _, n_plus, n_minus = h.paired()
    np.testing.assert_array_equal(n_plus, n_minus)
    assert h.outside == 0


def test_histogram_counts_outside_and_rounds_range():
    h = histogram(np.array([-10.0, 0.5, 10.0, np.inf]), bin_width=1.0, half_range=2.5)
    assert h.n_half == 3
    assert h.outside == 3
    assert h.counts.sum() == 1


def test_histogram_rejects_bad_width():
    with pytest.raises(InvalidInputError):
        histogram(np.zeros(3), bin_width=0.0)


def test_auto_binning_gives_200_bins(rng):
    h = histogram(rng.normal(size=10_000))
    assert h.counts.size == 200


def _synthetic_histogram(slope):
    w, k = 0.1, 40
    edges = w * np.arange(-k, k + 1)
    centers = 0.5 * (edges[1:] + edges[:-1])
    counts = 1e9 * np.exp(-np.abs(centers)) * np.exp(0.5 * slope * centers)
    return HeatHistogram(edges, counts, int(counts.sum()))


def test_xft_fit_recovers_exact_line():
    fit = xft_fit(_synthetic_histogram(0.3))
    assert fit.slope == pytest.approx(0.3, rel=1e-10)
    assert fit.intercept == pytest.approx(0.0, abs=1e-10)
    assert fit.chi2 == pytest.approx(0.0, abs=1e-12)
    assert fit.bins_used == 40


def test_xft_fit_needs_five_pairs():
    edges = np.arange(-4.0, 5.0)
    counts = np.array([0, 0, 0, 100, 100, 0, 0, 0])
    with pytest.raises(InsufficientBinsError) as exc:
        xft_fit(HeatHistogram(edges, counts, 200))
    assert exc.value.n_pairs == 1


def test_laplace_normalisation_and_mean():
    lap = AsymmetricLaplace(0.6, 1.7)
    total, _ = sp_integrate.quad(lap.pdf, -math.inf, 0)
    total += sp_integrate.quad(lap.pdf, 0, math.inf)[0]
    assert total == pytest.approx(1.0, abs=1e-12)
    mean = sp_integrate.quad(lambda q: q * lap.pdf(q), -math.inf, 0)[0]
    mean += sp_integrate.quad(lambda q: q * lap.pdf(q), 0, math.inf)[0]
    assert mean == pytest.approx(lap.mean, rel=1e-10)
    for q in (-2.0, -0.1, 0.0, 0.3, 4.0):
        assert lap.cdf(q) == pytest.approx(sp_integrate.quad(lap.pdf, -math.inf, q)[0], abs=1e-9)


def test_laplace_rates_and_precondition(full_swap):
    lap = analytic_full_swap_pdf(full_swap)
    assert lap.rate_pos == pytest.approx(1.0 / nu_thermal(full_swap.spec_a))
    assert lap.rate_neg == pytest.approx(1.0 / nu_thermal(full_swap.spec_b))
    # The log-ratio slope of the law is rate_neg - rate_pos.
    assert math.log(lap.pdf(1.0) / lap.pdf(-1.0)) == pytest.approx(delta_beta(full_swap), rel=1e-13)
    with pytest.raises(PreconditionError):
        analytic_full_swap_pdf(make_protocol(tau=math.pi / 4))
    assert is_full_swap(make_protocol(strength=3.0, tau=math.pi / 2))


def test_characteristic_function_matches_laplace_transform(full_swap):
    lap = analytic_full_swap_pdf(full_swap)
    a, b = lap.rate_pos, lap.rate_neg
    u = np.linspace(-20, 20, 101)
    expected = a * b / ((a - 1j * u) * (b + 1j * u))
    np.testing.assert_allclose(characteristic_function(heat_eigenvalues(full_swap), u), expected, rtol=1e-12)


def test_cf_inversion_matches_laplace(full_swap):
    grid = np.linspace(-30, 40, 7001)
    tab = characteristic_function_pdf(full_swap, grid)
    lap = analytic_full_swap_pdf(full_swap)
    assert np.max(np.abs(tab.density - lap.pdf(grid))) < 1e-4
    assert tab.mass() == pytest.approx(1.0, abs=1e-4)


def test_cf_inversion_zero_coupling_is_a_delta():
    p = make_protocol(strength=0.0)
    grid = np.linspace(-1, 1, 201)
    tab = characteristic_function_pdf(p, grid)
    assert tab.mass() == pytest.approx(1.0, rel=1e-12)
    assert tab.density[np.argmax(tab.density)] > 0 and grid[np.argmax(tab.density)] == pytest.approx(0.0, abs=1e-12)


def test_partial_swap_cf_vs_monte_carlo():
    p = make_protocol(tau=math.pi / 4)
    samples = sample_heat(p, 200_000, seed=9)
    tab = characteristic_function_pdf(p, np.linspace(-40, 50, 18001))
    assert ks_distance(samples, tab.cdf) <= 0.02


def test_full_swap_monte_carlo_vs_laplace(full_swap):
    samples = sample_heat(full_swap, 200_000, seed=1)
    assert ks_distance(samples, analytic_full_swap_pdf(full_swap).cdf) < 0.01


def test_ks_distance_of_uniform_grid():
    q = (np.arange(10) + 0.5) / 10
    assert ks_distance(q, lambda x: np.clip(x, 0, 1)) == pytest.approx(0.05)


def test_sampling_is_thread_independent(full_swap):
    n = 3 * 65536 + 17
    a = sample_heat(full_swap, n, seed=4, threads=1)
    b = sample_heat(full_swap, n, seed=4, threads=4)
    np.testing.assert_array_equal(a.heat, b.heat)
    assert a.n_blocks == 4
    rev = sample_reverse_heat(full_swap, n, seed=4)
    assert not np.array_equal(rev.heat, a.heat)


def test_mgf_trivial_order_and_unit_identity(full_swap):
    samples = sample_heat(full_swap, 200_000, seed=2)
    dbo = delta_beta(full_swap)
    zero = mgf_estimate(samples, dbo, 0.0)
    assert (zero.value, zero.stderr) == (1.0, 0.0)
    one = mgf_estimate(samples, dbo, 1.0)
    assert abs(one.value - 1.0) <= 4 * one.stderr


def test_mgf_trims_overflow():
    q = np.array([-1e6, 0.0, 1.0, 2.0] * 100)
    with pytest.warns(HeavyTailWarning):
        est = mgf_estimate(q, 1.0, 1.0)
    assert est.trimmed_fraction == pytest.approx(0.25)
    assert math.isfinite(est.value)


def test_clausius_sign(full_swap):
    res = clausius_check(sample_heat(full_swap, 100_000, seed=3), delta_beta(full_swap))
    assert res.mean_q > 3 * res.stderr
    assert res.sign_ok
    bad = clausius_check(np.full(100, -1.0) + np.linspace(0, 1e-3, 100), 1.0)
    assert not bad.sign_ok


def test_tune_equal_beta_against_root_finder():
    spec_a = OscillatorSpec(1.0, 2.0)
    spec_b = tune_equal_beta(spec_a, 1.7)
    oracle = optimize.brentq(
        lambda t: beta_omega(OscillatorSpec(1.7, t)) - beta_omega(spec_a), 1e-3, 1e3, xtol=1e-14
    )
    assert spec_b.temperature == pytest.approx(oracle, rel=1e-10)


def test_equal_beta_detuned_pair_still_absorbs_switching_work():
    # Equal effective temperatures do not imply zero mean heat once the coupling
    # fails to conserve energy: switching it on and off does work on both modes.
    spec_a = OscillatorSpec(1.0, 2.0)
    spec_b = tune_equal_beta(spec_a, 1.7)
    p = make_protocol(omega_b=1.7, t_b=spec_b.temperature, kind="position_position", strength=0.3, tau=3.0)
    assert delta_beta(p) == pytest.approx(0.0, abs=1e-12)
    samples = sample_heat(p, 200_000, seed=5)
    res = clausius_check(samples, delta_beta(p))
    assert abs(res.mean_q) > 10 * res.stderr
    assert samples.defect_stats()["mean_abs"] > 0.01


def test_equal_temperature_resonant_pair_has_no_mean_heat():
    p = make_protocol(t_a=1.3, t_b=1.3, strength=0.8, tau=1.1)
    res = clausius_check(sample_heat(p, 200_000, seed=5), delta_beta(p))
    assert abs(res.mean_q) <= 3 * res.stderr


def test_reverse_consistency_z_scores(full_swap):
    fwd = sample_heat(full_swap, 400_000, seed=8)
    rev = sample_reverse_heat(full_swap, 400_000, seed=8)
    h_f = histogram(fwd, bin_width=0.25, half_range=15.0)
    h_r = histogram(rev, bin_width=0.25, half_range=15.0)
    z = reverse_consistency(h_f, h_r, delta_beta(full_swap))
    assert z.size > 10
    # Bin-integrated counts pick up a curvature bias of order (dbeta w)^2 / 24; tiny here.
    assert np.max(np.abs(z)) < 5.0
    assert np.mean(z**2) < 2.0
    with pytest.raises(InvalidInputError):
        reverse_consistency(h_f, histogram(rev, bin_width=0.5, half_range=15.0), 0.5)
