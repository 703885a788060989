"""Quadratic couplings, forward propagators and single trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .states import OscillatorSpec
from .symplectic import TIME_REVERSAL, propagator, symmetrize

COUPLING_KINDS = ("beam_splitter", "position_position", "two_mode_squeeze")


def _interaction_matrix(kind: str, strength: float) -> np.ndarray:
    g = np.zeros((4, 4))
    if kind == "beam_splitter":  # lam (qA qB + pA pB)
        g[0, 2] = g[2, 0] = strength
        g[1, 3] = g[3, 1] = strength
    elif kind == "position_position":  # lam qA qB
        g[0, 2] = g[2, 0] = strength
    elif kind == "two_mode_squeeze":  # lam (qA qB - pA pB)
        g[0, 2] = g[2, 0] = strength
        g[1, 3] = g[3, 1] = -strength
    else:
        raise InvalidInputError(
            f"unknown coupling kind {kind!r}; valid kinds: {', '.join(COUPLING_KINDS)}"
        )
    return g


@dataclass(frozen=True)
class CouplingModel:
    kind: str
    strength: float

    def __post_init__(self):
        if not (math.isfinite(self.strength) and self.strength >= 0):
            raise InvalidInputError(f"coupling strength must be >= 0, got {self.strength!r}")
        g = _interaction_matrix(self.kind, self.strength)
        if not np.array_equal(TIME_REVERSAL @ g @ TIME_REVERSAL, g):
            raise InvalidInputError(f"{self.kind} generator is not time-reversal symmetric")

    def generator(self) -> np.ndarray:
        return _interaction_matrix(self.kind, self.strength)


@dataclass(frozen=True)
class ProtocolSpec:
    """Two thermal modes coupled by ``coupling`` for a duration ``tau``.

    The coupling is switched on suddenly at ``t = 0`` and off at ``t = tau``.
    """

    spec_a: OscillatorSpec
    spec_b: OscillatorSpec
    coupling: CouplingModel
    tau: float

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise InvalidInputError(f"tau must be a positive finite duration, got {self.tau!r}")
        if self.spec_a.hbar != self.spec_b.hbar:
            raise InvalidInputError("both oscillators must share the same hbar")

    @property
    def hbar(self) -> float:
        return self.spec_a.hbar

    @property
    def is_resonant(self) -> bool:
        return self.spec_a.omega == self.spec_b.omega

    @property
    def mixing_angle(self) -> float:
        """``strength * tau``; the beam-splitter mixing angle at resonance."""
        return self.coupling.strength * self.tau

    @property
    def conserves_energy(self) -> bool:
        """Whether ``H_A + H_B`` is exactly conserved along every trajectory."""
        return self.coupling.strength == 0 or (
            self.coupling.kind == "beam_splitter" and self.is_resonant
        )


def total_generator(p: ProtocolSpec) -> np.ndarray:
    """``G_A (+) G_B + G_int`` with ``G_alpha = omega_alpha * I_2``."""
    g = np.diag([p.spec_a.omega, p.spec_a.omega, p.spec_b.omega, p.spec_b.omega])
    return symmetrize(g + p.coupling.generator())


def forward_propagator(p: ProtocolSpec) -> np.ndarray:
    return propagator(total_generator(p), p.tau)


def mode_energies(p: ProtocolSpec, xi) -> tuple[np.ndarray, np.ndarray]:
    """Free energies ``(H_A, H_B)`` at phase point(s) ``xi``."""
    xi = np.asarray(xi, dtype=float)
    h_a = 0.5 * p.spec_a.quantum * (xi[..., 0] ** 2 + xi[..., 1] ** 2)
    h_b = 0.5 * p.spec_b.quantum * (xi[..., 2] ** 2 + xi[..., 3] ** 2)
    return h_a, h_b


@dataclass(frozen=True)
class TrajectoryPair:
    xi0: np.ndarray
    xi_tau: np.ndarray
    xi0_bar: np.ndarray
    heat: float | np.ndarray
    energy_defect: float | np.ndarray


def propagate(s: np.ndarray, xi0) -> np.ndarray:
    """Apply ``S`` to a phase vector or an ``(n, 4)`` batch."""
    return np.asarray(xi0, dtype=float) @ s.T


def heat_and_defect(p: ProtocolSpec, xi0, xi_tau) -> tuple[np.ndarray, np.ndarray]:
    """Heat gained by B and the total free-energy change ``dE_A + dE_B``.

    Mode energies are even in the momenta, so evaluating them at the evolved
    point equals evaluating them at its time-reversed image.
    """
    ha0, hb0 = mode_energies(p, xi0)
    hat, hbt = mode_energies(p, xi_tau)
    d_b = hbt - hb0
    return d_b, (hat - ha0) + d_b


def run_trajectory(p: ProtocolSpec, xi0, s: np.ndarray | None = None) -> TrajectoryPair:
    """Evolve ``xi0`` through the protocol and record heat and energy defect.

    ``s`` may be passed to reuse a precomputed forward propagator. Batched
    initial points (shape ``(n, 4)``) give array-valued heat and defect.
    """
    s = forward_propagator(p) if s is None else s
    xi0 = np.asarray(xi0, dtype=float)
    xi_tau = propagate(s, xi0)
    q, defect = heat_and_defect(p, xi0, xi_tau)
    if xi0.ndim == 1:
        q, defect = float(q), float(defect)
    return TrajectoryPair(
        xi0=xi0,
        xi_tau=xi_tau,
        xi0_bar=xi_tau @ TIME_REVERSAL,
        heat=q,
        energy_defect=defect,
    )
