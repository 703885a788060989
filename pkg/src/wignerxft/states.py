"""Thermal Gaussian states of two harmonic oscillators.

Units: Boltzmann's constant is 1, ``hbar`` is an explicit parameter. Each mode
is described in dimensionless quadratures, with energy
``H(q, p) = hbar * omega * (q**2 + p**2) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import (
    DivergenceUndefinedError,
    InvalidInputError,
    InvalidStateError,
    NumericalDegeneracyError,
)
from .symplectic import williamson_eigenvalues

# Below this value of hbar*omega/(2T), coth is replaced by its Laurent series.
_SERIES_CUTOFF = 1e-8
_MAX_CONDITION = 1e12


@dataclass(frozen=True)
class OscillatorSpec:
    """One thermal mode: angular frequency, temperature and the value of hbar."""

    omega: float
    temperature: float
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("omega", "temperature", "hbar"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be a positive finite number, got {value!r}")

    @property
    def x(self) -> float:
        """Dimensionless ratio ``hbar * omega / (2 T)``."""
        return self.hbar * self.omega / (2.0 * self.temperature)

    @property
    def quantum(self) -> float:
        """Energy quantum ``hbar * omega``."""
        return self.hbar * self.omega


def _coth(x: float) -> float:
    if x < _SERIES_CUTOFF:
        return 1.0 / x + x / 3.0
    return 1.0 / math.tanh(x)


def nu_thermal(spec: OscillatorSpec) -> float:
    """Symplectic eigenvalue ``coth(hbar omega / 2T) / 2`` of a thermal mode."""
    return 0.5 * _coth(spec.x)


def beta_omega(spec: OscillatorSpec) -> float:
    """Effective inverse temperature ``2 tanh(hbar omega / 2T) / (hbar omega)``."""
    return 2.0 * math.tanh(spec.x) / spec.quantum


def thermal_variance(specs: tuple[OscillatorSpec, OscillatorSpec]) -> np.ndarray:
    spec_a, spec_b = specs
    nu_a, nu_b = nu_thermal(spec_a), nu_thermal(spec_b)
    return np.diag([nu_a, nu_a, nu_b, nu_b])


@dataclass(frozen=True)
class TwoModeThermalState:
    spec_a: OscillatorSpec
    spec_b: OscillatorSpec

    @property
    def nu_a(self) -> float:
        return nu_thermal(self.spec_a)

    @property
    def nu_b(self) -> float:
        return nu_thermal(self.spec_b)

    @property
    def variance(self) -> np.ndarray:
        return thermal_variance((self.spec_a, self.spec_b))


def check_physical(v, tol: float = 1e-12) -> np.ndarray:
    """Validate a 4x4 variance matrix and return it as a float array."""
    v = np.asarray(v, dtype=float)
    if v.shape != (4, 4):
        raise InvalidInputError(f"variance matrix must be 4x4, got {v.shape}")
    nu = williamson_eigenvalues(v)
    if min(nu) < 0.5 - tol:
        raise InvalidStateError(f"symplectic eigenvalues {nu} violate the uncertainty bound 1/2")
    return v


def wigner_eval(v, xi) -> np.ndarray | float:
    """Gaussian Wigner function with zero mean and variance matrix ``v``.

    ``xi`` may be a single phase vector or an ``(n, 4)`` batch.

    Raises:
        NumericalDegeneracyError: if ``cond(v) > 1e12``.
    """
    v = check_physical(v)
    if np.linalg.cond(v) > _MAX_CONDITION:
        raise NumericalDegeneracyError("variance matrix is too ill-conditioned")
    xi = np.asarray(xi, dtype=float)
    chol = np.linalg.cholesky(v)
    z = np.linalg.solve(chol, xi.reshape(-1, 4).T)
    quad = np.sum(z * z, axis=0)
    sqrt_det = np.prod(np.diag(chol))
    w = np.exp(-0.5 * quad) / ((2.0 * np.pi) ** 2 * sqrt_det)
    return float(w[0]) if xi.ndim == 1 else w


def wigner_sample(v, gen: np.random.Generator, size: int = 1) -> np.ndarray:
    """Draw ``size`` phase points from the Wigner density of ``v``.

    Uses the Cholesky factor of ``v`` applied to Box-Muller normals; the result
    has shape ``(size, 4)``.
    """
    v = np.asarray(v, dtype=float)
    try:
        chol = np.linalg.cholesky(v)
    except np.linalg.LinAlgError as exc:
        raise InvalidStateError("variance matrix is not positive definite") from exc
    z = rng.standard_normals(gen, 4 * size).reshape(size, 4)
    return z @ chol.T


def mean_energy(spec: OscillatorSpec) -> float:
    """Thermal mean energy ``hbar omega nu_T``, zero-point energy included."""
    return spec.quantum * nu_thermal(spec)


def partition_function(spec: OscillatorSpec) -> float:
    """``exp(-hbar w / 2T) / (1 - exp(-hbar w / T))``."""
    x = spec.x
    return math.exp(-x) / -math.expm1(-2.0 * x)


def evolve_variance(v, s) -> np.ndarray:
    """Congruence ``S V S^T``, symmetrized against round-off."""
    v = np.asarray(v, dtype=float)
    s = np.asarray(s, dtype=float)
    out = s @ v @ s.T
    return 0.5 * (out + out.T)


def renyi_overlap(v0, v_tau, s: float) -> float:
    """``log`` of the overlap integral of ``W0**(1-s) * W_tau**s`` over phase space.

    For zero-mean Gaussians the integral is
    ``det(V0)^((s-1)/2) det(Vt)^(-s/2) det(M)^(-1/2)`` with mixed precision
    matrix ``M = (1-s) V0^-1 + s Vt^-1``.

    Raises:
        DivergenceUndefinedError: if ``M`` is not positive definite (the integral
            is infinite).
    """
    v0 = np.asarray(v0, dtype=float)
    v_tau = np.asarray(v_tau, dtype=float)
    if not math.isfinite(s):
        raise InvalidInputError(f"order must be finite, got {s}")
    m = (1.0 - s) * np.linalg.inv(v0) + s * np.linalg.inv(v_tau)
    m = 0.5 * (m + m.T)
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise DivergenceUndefinedError(
            f"mixed precision matrix is not positive definite at s={s}"
        ) from None
    _, logdet0 = np.linalg.slogdet(v0)
    _, logdet_t = np.linalg.slogdet(v_tau)
    logdet_m = 2.0 * np.sum(np.log(np.diag(chol)))
    return 0.5 * (s - 1.0) * logdet0 - 0.5 * s * logdet_t - 0.5 * logdet_m


def renyi_divergence_wigner(v0, v_tau, s: float) -> float:
    """Order-``s`` Renyi divergence ``log(int W0^(1-s) Wt^s) / (1 - s)``.

    With this normalisation the value is ``<= 0`` for ``0 < s < 1``; it is the
    quantity whose exponential ``exp((1 - s) R_s)`` is the heat moment
    generating function.
    """
    if s == 1.0:
        raise InvalidInputError("order s=1 is a removable singularity; use kl_limit")
    return renyi_overlap(v0, v_tau, s) / (1.0 - s)


def kl_limit(v0, v_tau) -> float:
    """``s -> 1`` limit of :func:`renyi_divergence_wigner`, equal to ``-KL(W_tau || W0)``."""
    v0 = np.asarray(v0, dtype=float)
    v_tau = np.asarray(v_tau, dtype=float)
    _, logdet0 = np.linalg.slogdet(v0)
    _, logdet_t = np.linalg.slogdet(v_tau)
    kl = 0.5 * (np.trace(np.linalg.solve(v0, v_tau)) - 4.0 + logdet0 - logdet_t)
    return -float(kl)
