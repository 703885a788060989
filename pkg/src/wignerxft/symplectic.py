"""Two-mode symplectic algebra.

Phase-space vectors are ordered ``(q_A, p_A, q_B, p_B)``. A quadratic
Hamiltonian ``h(xi) = xi^T G xi / 2`` generates the flow ``d xi/dt = Omega G xi``,
so its propagator is ``S(t) = expm(Omega G t)``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, InvalidStateError, NumericalDegeneracyError

OMEGA = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)
OMEGA.setflags(write=False)

TIME_REVERSAL = np.diag([1.0, -1.0, 1.0, -1.0])
TIME_REVERSAL.setflags(write=False)


def omega() -> np.ndarray:
    """Return a fresh copy of the block-diagonal symplectic form."""
    return OMEGA.copy()


def _as_4x4(m, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise InvalidInputError(f"{name} must be 4x4, got shape {m.shape}")
    return m


def symmetrize(g) -> np.ndarray:
    """Return ``(G + G^T) / 2`` as a float 4x4 array."""
    g = _as_4x4(g, "G")
    return 0.5 * (g + g.T)


def symplectic_residual(s) -> float:
    """Max-norm of ``S Omega S^T - Omega``."""
    s = _as_4x4(s, "S")
    return float(np.max(np.abs(s @ OMEGA @ s.T - OMEGA)))


def is_symplectic(s, tol: float = 1e-10) -> bool:
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    return symplectic_residual(s) <= tol


def propagator(g, t: float) -> np.ndarray:
    """Phase-space propagator ``expm(Omega G t)`` of the quadratic form ``G``.

    ``G`` is symmetrized before use. The exponential is evaluated by
    scaling and squaring with a Pade approximant.
    """
    g = symmetrize(g)
    if not np.all(np.isfinite(g)):
        raise InvalidInputError("generator has non-finite entries")
    if not np.isfinite(t):
        raise InvalidInputError(f"duration must be finite, got {t}")
    if t == 0:
        return np.eye(4)
    return scipy.linalg.expm(OMEGA @ g * t)


def time_reverse(xi) -> np.ndarray:
    """Negate the momenta. Works on a single vector or a ``(n, 4)`` batch."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != 4:
        raise InvalidInputError(f"phase vectors need 4 components, got shape {xi.shape}")
    out = xi.copy()
    out[..., 1] = -out[..., 1]
    out[..., 3] = -out[..., 3]
    return out


def microreversibility_residual(s) -> float:
    s = _as_4x4(s, "S")
    try:
        s_inv = np.linalg.inv(s)
    except np.linalg.LinAlgError as exc:
        raise NumericalDegeneracyError("propagator is singular") from exc
    return float(np.max(np.abs(TIME_REVERSAL @ s @ TIME_REVERSAL - s_inv)))


def microreversibility_check(s, tol: float = 1e-9) -> bool:
    """True iff ``T S T = S^{-1}`` within ``tol``, ``T`` being momentum reversal.

    This is the statement that the time-reversed image of every forward
    trajectory is itself a trajectory of the same dynamics.
    """
    return microreversibility_residual(s) <= tol


def williamson_eigenvalues(v, degeneracy_rtol: float = 1e-8) -> tuple[float, float]:
    """Symplectic eigenvalues ``(nu_max, nu_min)`` of a two-mode variance matrix.

    The spectrum of ``-(V Omega)^2`` is ``{nu_1^2, nu_1^2, nu_2^2, nu_2^2}``;
    the doubly degenerate pairs are matched after sorting and checked.

    Raises:
        InvalidStateError: if ``V`` is not symmetric positive definite.
        NumericalDegeneracyError: if the spectrum is not doubly degenerate.
    """
    v = _as_4x4(v, "V")
    if not np.allclose(v, v.T, rtol=1e-12, atol=1e-14 * max(1.0, np.max(np.abs(v)))):
        raise InvalidStateError("variance matrix is not symmetric")
    try:
        np.linalg.cholesky(v)
    except np.linalg.LinAlgError as exc:
        raise InvalidStateError("variance matrix is not positive definite") from exc

    vo = v @ OMEGA
    ev = np.linalg.eigvals(-(vo @ vo))
    ev = np.sort(ev.real)
    pairs = ev.reshape(2, 2)
    for lo, hi in pairs:
        if abs(hi - lo) > degeneracy_rtol * max(abs(hi), abs(lo)):
            raise NumericalDegeneracyError(
                f"spectrum of -(V Omega)^2 not doubly degenerate: {ev}"
            )
    nu = np.sqrt(pairs.mean(axis=1))
    return float(nu[1]), float(nu[0])
