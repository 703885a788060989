"""Tensor-product Gauss-Hermite quadrature over four-dimensional phase space."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import roots_hermite


def gauss_hermite_nodes(cov, n_nodes: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Nodes ``(n**4, 4)`` and weights for ``int f(xi) d xi`` adapted to ``cov``.

    With ``cov = L L^T`` and ``xi = sqrt(2) L y`` the integral becomes
    ``4 det(L) int exp(-|y|^2) [exp(|y|^2) f(xi)] dy``; the returned weights
    already contain every factor except ``f``.
    """
    chol = np.linalg.cholesky(np.asarray(cov, dtype=float))
    y1, w1 = roots_hermite(n_nodes)
    y = np.stack(np.meshgrid(y1, y1, y1, y1, indexing="ij"), axis=-1).reshape(-1, 4)
    w = np.prod(np.stack(np.meshgrid(w1, w1, w1, w1, indexing="ij"), axis=-1).reshape(-1, 4), axis=1)
    w = w * np.exp(np.sum(y * y, axis=1)) * 4.0 * np.prod(np.diag(chol))
    return math.sqrt(2.0) * y @ chol.T, w


def integrate(f, cov, n_nodes: int = 20) -> float:
    """Integrate a vectorised ``f((n, 4) array) -> (n,)`` over phase space."""
    xi, w = gauss_hermite_nodes(cov, n_nodes)
    return float(np.sum(w * f(xi)))


def _log_gauss(cov, xi):
    cov = np.asarray(cov, dtype=float)
    prec = np.linalg.inv(cov)
    _, logdet = np.linalg.slogdet(cov)
    return -0.5 * np.einsum("ni,ij,nj->n", xi, prec, xi) - 0.5 * logdet - 2.0 * math.log(2.0 * math.pi)


def renyi_overlap_quadrature(v0, v_tau, s: float, n_nodes: int = 40) -> float:
    """``log int W0^(1-s) Wt^s`` by quadrature adapted to ``(V0 + Vt) / 2``."""
    ref = 0.5 * (np.asarray(v0, dtype=float) + np.asarray(v_tau, dtype=float))
    xi, w = gauss_hermite_nodes(ref, n_nodes)
    log_f = (1.0 - s) * _log_gauss(v0, xi) + s * _log_gauss(v_tau, xi)
    return float(math.log(np.sum(w * np.exp(log_f))))
