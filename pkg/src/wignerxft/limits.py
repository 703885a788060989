"""The modified inverse-temperature difference and its limits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .states import OscillatorSpec, beta_omega, mean_energy, nu_thermal


@dataclass(frozen=True)
class BetaOmega:
    beta_a_omega: float
    beta_b_omega: float

    @property
    def delta(self) -> float:
        return self.beta_b_omega - self.beta_a_omega


def delta_beta_omega(spec_a: OscillatorSpec, spec_b: OscillatorSpec, check: bool = True) -> BetaOmega:
    """``beta_alpha = 2 tanh(hbar w / 2T) / (hbar w)`` for both modes.

    With ``check`` the tanh form is cross-checked against ``1 / (hbar w nu_T)``
    to 1e-12 relative.
    """
    out = BetaOmega(beta_omega(spec_a), beta_omega(spec_b))
    if check:
        for spec, beta in ((spec_a, out.beta_a_omega), (spec_b, out.beta_b_omega)):
            product = beta * spec.quantum * nu_thermal(spec)
            if abs(product - 1.0) > 1e-12:
                raise ArithmeticError(f"dual-formula mismatch for {spec}: {product!r}")
    return out


def delta_beta_classical(t_a: float, t_b: float) -> float:
    """``1/T_B - 1/T_A`` with Boltzmann's constant set to one."""
    if not (t_a > 0 and t_b > 0):
        raise InvalidInputError("temperatures must be positive")
    return 1.0 / t_b - 1.0 / t_a


@dataclass(frozen=True)
class LimitSweepReport:
    hbar_values: np.ndarray
    delta_beta_omega: np.ndarray
    delta_beta: float
    delta_beta_errors: np.ndarray
    error_ratios: np.ndarray
    convergence_order_estimate: float
    slope_errors: np.ndarray | None = None


def classical_limit_sweep(spec_a: OscillatorSpec, spec_b: OscillatorSpec, hbar_values) -> LimitSweepReport:
    """Tabulate ``|dbeta_omega(hbar) - dbeta|`` along a decreasing ``hbar`` sequence.

    The convergence order is the mean of ``log(e_k / e_{k+1}) / log(h_k / h_{k+1})``;
    ``tanh(x)/x = 1 - x^2/3 + ...`` predicts 2.
    """
    h = np.asarray(hbar_values, dtype=float)
    if h.size < 3:
        raise InvalidInputError("need at least three hbar values")
    if np.any(h <= 0):
        raise InvalidInputError("hbar values must be positive; use delta_beta_classical for hbar = 0")
    if np.any(np.diff(h) >= 0):
        raise InvalidInputError("hbar values must be strictly decreasing")
    steps = h[:-1] / h[1:]
    if not np.allclose(steps, steps[0], rtol=1e-9):
        raise InvalidInputError("hbar values must form a geometric progression")

    target = delta_beta_classical(spec_a.temperature, spec_b.temperature)
    dbo = np.array(
        [
            delta_beta_omega(
                OscillatorSpec(spec_a.omega, spec_a.temperature, hb),
                OscillatorSpec(spec_b.omega, spec_b.temperature, hb),
            ).delta
            for hb in h
        ]
    )
    err = np.abs(dbo - target)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = err[:-1] / err[1:]
        order = float(np.mean(np.log(ratios) / np.log(steps)))
    return LimitSweepReport(h, dbo, target, err, ratios, order)


def low_temperature_slope(omega_a: float, omega_b: float, hbar: float = 1.0) -> float:
    """Zero-temperature log-ratio slope ``(2/hbar) (1/omega_B - 1/omega_A)``."""
    return 2.0 / hbar * (1.0 / omega_b - 1.0 / omega_a)


def low_temperature_ratio(spec_a: OscillatorSpec, spec_b: OscillatorSpec) -> float:
    """Zero-temperature limit of ``dbeta_omega`` for the frequencies of the given modes."""
    if spec_a.hbar != spec_b.hbar:
        raise InvalidInputError("both modes must share hbar")
    return low_temperature_slope(spec_a.omega, spec_b.omega, spec_a.hbar)


def low_temperature_check(omega_a: float, omega_b: float, hbar: float = 1.0, x: float = 20.0) -> tuple[float, float, float]:
    """``(dbeta_omega, limit, relative error)`` with both modes at ``hbar w / 2T = x``."""
    spec_a = OscillatorSpec(omega_a, hbar * omega_a / (2 * x), hbar)
    spec_b = OscillatorSpec(omega_b, hbar * omega_b / (2 * x), hbar)
    value = delta_beta_omega(spec_a, spec_b).delta
    limit = low_temperature_ratio(spec_a, spec_b)
    rel = abs(value - limit) / abs(limit) if limit != 0 else abs(value)
    return value, limit, rel


@dataclass(frozen=True)
class EquipartitionReport:
    quantum_energy: float
    classical_energy: float

    @property
    def ratio(self) -> float:
        return self.quantum_energy / self.classical_energy


def equipartition_report(spec: OscillatorSpec) -> EquipartitionReport:
    """Quantum mean energy ``hbar w nu_T`` next to the classical value ``T``."""
    return EquipartitionReport(mean_energy(spec), spec.temperature)


def tune_equal_beta(spec_a: OscillatorSpec, omega_b: float) -> OscillatorSpec:
    """Mode B at frequency ``omega_b`` whose ``beta_omega`` equals that of ``spec_a``."""
    target = beta_omega(spec_a)
    # beta_omega decreases monotonically in T; solve 2 tanh(hw/2T)/(hw) = target.
    y = target * spec_a.hbar * omega_b / 2.0
    if not y < 1.0:
        raise InvalidInputError(f"no temperature gives beta_omega={target} at omega={omega_b}")
    t_b = spec_a.hbar * omega_b / (2.0 * math.atanh(y))
    return OscillatorSpec(omega_b, t_b, spec_a.hbar)
