import math

import mpmath
import numpy as np
import pytest
from scipy import integrate as sp_integrate

from conftest import make_protocol
from wignerxft.checks import random_physical_variance, random_symplectic
from wignerxft.dynamics import forward_propagator
from wignerxft.errors import DivergenceUndefinedError, InvalidInputError, InvalidStateError, NumericalDegeneracyError
from wignerxft.quadrature import integrate, renyi_overlap_quadrature
from wignerxft.rng import block_generator
from wignerxft.states import (
    OscillatorSpec,
    TwoModeThermalState,
    beta_omega,
    check_physical,
    evolve_variance,
    kl_limit,
    mean_energy,
    nu_thermal,
    partition_function,
    renyi_divergence_wigner,
    renyi_overlap,
    thermal_variance,
    wigner_eval,
    wigner_sample,
)


def test_nu_thermal_against_high_precision():
    spec = OscillatorSpec(1.0, 1.0)
    expected = float(mpmath.coth(mpmath.mpf(1) / 2) / 2)
    assert nu_thermal(spec) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(1.08198, abs=1e-5)


def test_nu_thermal_limits():
    # ħω/T -> 0 gives T/ħω; ħω/T -> inf gives the vacuum value 1/2.
    hot = OscillatorSpec(1.0, 1e10)
    assert nu_thermal(hot) == pytest.approx(1e10, rel=1e-12)
    assert nu_thermal(OscillatorSpec(1.0, 1e-3)) == 0.5


def test_series_branch_is_continuous():
    below = OscillatorSpec(1.0, 0.5 / 0.99e-8)
    above = OscillatorSpec(1.0, 0.5 / 1.01e-8)
    for spec in (below, above):
        x = mpmath.mpf(spec.x)
        assert nu_thermal(spec) == pytest.approx(float(mpmath.coth(x) / 2), rel=1e-14)


def test_beta_omega_is_inverse_mean_energy():
    for t in (0.1, 1.0, 7.0):
        spec = OscillatorSpec(1.3, t, 0.7)
        assert beta_omega(spec) * mean_energy(spec) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("field,value", [("omega", 0.0), ("temperature", -1.0), ("hbar", math.nan)])
def test_spec_validation(field, value):
    kwargs = {"omega": 1.0, "temperature": 1.0, "hbar": 1.0, field: value}
    with pytest.raises(InvalidInputError, match=field):
        OscillatorSpec(**kwargs)


def test_thermal_variance_layout():
    a, b = OscillatorSpec(1.0, 2.0), OscillatorSpec(2.0, 1.0)
    v = thermal_variance((a, b))
    np.testing.assert_array_equal(v, np.diag([nu_thermal(a)] * 2 + [nu_thermal(b)] * 2))
    np.testing.assert_array_equal(TwoModeThermalState(a, b).variance, v)


def test_check_physical_rejects_sub_vacuum():
    with pytest.raises(InvalidStateError):
        check_physical(np.diag([0.4, 0.4, 1.0, 1.0]))
    with pytest.raises(InvalidInputError):
        check_physical(np.eye(3))


def test_wigner_vacuum_peak():
    v = 0.5 * np.eye(4)
    assert wigner_eval(v, np.zeros(4)) == pytest.approx(1.0 / math.pi**2, rel=1e-14)


def test_wigner_is_product_of_mode_densities(rng):
    v = np.diag([1.5, 1.5, 0.7, 0.7])
    xi = rng.normal(size=(10, 4))

    def mode(nu, q, p):
        return np.exp(-(q * q + p * p) / (2 * nu)) / (2 * math.pi * nu)

    expected = mode(1.5, xi[:, 0], xi[:, 1]) * mode(0.7, xi[:, 2], xi[:, 3])
    np.testing.assert_allclose(wigner_eval(v, xi), expected, rtol=1e-13)


def test_wigner_normalisation(rng):
    v = random_physical_variance(rng)
    # Quadrature adapted to a wider Gaussian, so the integrand is not trivially its weight.
    total = integrate(lambda xi: wigner_eval(v, xi), 1.3 * v, n_nodes=30)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_wigner_rejects_ill_conditioned():
    v = np.diag([1e13, 1.0, 0.5, 0.5])
    with pytest.raises(NumericalDegeneracyError):
        wigner_eval(v, np.zeros(4))


def test_sampler_covariance():
    v = random_physical_variance(np.random.default_rng(7))
    n = 1_000_000
    xi = wigner_sample(v, block_generator(5, 0), n)
    est = xi.T @ xi / n
    # Var of a sample second moment: (V_ii V_jj + V_ij^2) / n.
    se = np.sqrt((np.outer(np.diag(v), np.diag(v)) + v**2) / n)
    assert np.all(np.abs(est - v) < 5 * se)
    assert np.all(np.abs(xi.mean(axis=0)) < 5 * np.sqrt(np.diag(v) / n))


def test_sampler_is_deterministic():
    v = np.eye(4)
    a = wigner_sample(v, block_generator(11, 3), 100)
    b = wigner_sample(v, block_generator(11, 3), 100)
    c = wigner_sample(v, block_generator(11, 4), 100)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_mean_energy_and_partition_function():
    spec = OscillatorSpec(1.0, 1.0 / math.log(2.0))
    assert partition_function(spec) == pytest.approx(math.sqrt(2.0), rel=1e-14)

    # <H> = -d ln Z / d beta by central differences in beta = 1/T.
    spec = OscillatorSpec(1.7, 0.9, 0.8)
    beta, h = 1.0 / spec.temperature, 1e-5

    def ln_z(b):
        return math.log(partition_function(OscillatorSpec(spec.omega, 1.0 / b, spec.hbar)))

    numeric = -(ln_z(beta + h) - ln_z(beta - h)) / (2 * h)
    assert mean_energy(spec) == pytest.approx(numeric, rel=1e-8)


def test_partition_function_no_overflow_when_cold():
    assert partition_function(OscillatorSpec(1.0, 1e-3)) == pytest.approx(math.exp(-500.0), rel=1e-12)
    assert partition_function(OscillatorSpec(1.0, 1e-4)) == 0.0


def test_evolve_variance_under_swap():
    swap = np.zeros((4, 4))
    swap[0, 2] = swap[1, 3] = swap[2, 0] = swap[3, 1] = 1.0
    v = np.diag([2.0, 2.0, 0.5, 0.5])
    np.testing.assert_array_equal(evolve_variance(v, swap), np.diag([0.5, 0.5, 2.0, 2.0]))


def _overlap_by_1d_quad(d0, dt, s):
    # Diagonal covariances factorise into one-dimensional integrals.
    total = 0.0
    for a, b in zip(d0, dt):
        def f(x):
            log_g0 = -x * x / (2 * a) - 0.5 * math.log(2 * math.pi * a)
            log_gt = -x * x / (2 * b) - 0.5 * math.log(2 * math.pi * b)
            return math.exp((1 - s) * log_g0 + s * log_gt)
        val, _ = sp_integrate.quad(f, -math.inf, math.inf, epsabs=1e-14, epsrel=1e-13)
        total += math.log(val)
    return total


def test_renyi_overlap_diagonal_oracle():
    v0, vt = np.eye(4), 2.0 * np.eye(4)
    assert renyi_overlap(v0, vt, 0.5) == pytest.approx(math.log(8.0 / 9.0), rel=1e-13)
    d0, dt = [1.0, 1.0, 0.6, 0.6], [2.0, 2.0, 0.9, 0.9]
    for s in (0.25, 0.5, 0.75, 1.5):
        expected = _overlap_by_1d_quad(d0, dt, s)
        assert renyi_overlap(np.diag(d0), np.diag(dt), s) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_renyi_identical_states_vanish(rng):
    v = random_physical_variance(rng)
    for s in (0.25, 0.5, 0.75):
        assert renyi_overlap(v, v, s) == pytest.approx(0.0, abs=1e-13)


@pytest.mark.parametrize("kind,omega_b,tau", [("beam_splitter", 1.0, math.pi / 4), ("position_position", 1.5, 2.0)])
def test_renyi_matches_quadrature_for_coupled_states(kind, omega_b, tau):
    p = make_protocol(omega_b=omega_b, kind=kind, strength=0.6, tau=tau)
    v0 = thermal_variance((p.spec_a, p.spec_b))
    vt = evolve_variance(v0, forward_propagator(p))
    for s in (0.25, 0.5, 0.75):
        assert renyi_overlap(v0, vt, s) == pytest.approx(renyi_overlap_quadrature(v0, vt, s), abs=1e-6)


def test_renyi_sign_and_kl_limit(rng):
    v0 = random_physical_variance(rng)
    vt = evolve_variance(v0, random_symplectic(rng))
    for s in (0.1, 0.5, 0.9):
        assert renyi_divergence_wigner(v0, vt, s) <= 0.0
    assert renyi_divergence_wigner(v0, vt, 1 - 1e-6) == pytest.approx(kl_limit(v0, vt), rel=1e-4)
    with pytest.raises(InvalidInputError):
        renyi_divergence_wigner(v0, vt, 1.0)


def test_renyi_divergent_integral():
    with pytest.raises(DivergenceUndefinedError):
        renyi_overlap(np.eye(4), 2.0 * np.eye(4), 3.0)
