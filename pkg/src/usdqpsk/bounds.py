"""Optimal unambiguous-discrimination success probability for QPSK.

For M symmetric pure states the optimum is ``M * min_k lambda_k`` where
``lambda_k`` are the weights of the photon-number classes ``n = k (mod M)``.
For coherent states these are Poisson masses folded modulo four.
"""
from __future__ import annotations

import math

from .errors import ConfigurationError, ConvergenceError
from .physics import N_STATES


def class_weights(alpha_sq: float, tol: float = 1e-15, max_terms: int = 500) -> list[float]:
    """Poisson(|alpha|^2) probability of each residue class n mod 4.

    Terms are generated in ascending n by the ratio ``|alpha|^2 / n`` and the
    sum stops once a geometric bound on the remaining tail drops below ``tol``.
    """
    if not (alpha_sq >= 0.0 and math.isfinite(alpha_sq)):
        raise ConfigurationError(f"alpha_sq must be finite and >= 0, got {alpha_sq!r}")
    if not tol > 0.0:
        raise ConfigurationError("series tolerance must be positive")
    weights = [0.0] * N_STATES
    term = math.exp(-alpha_sq)
    for n in range(max_terms):
        weights[n % N_STATES] += term
        term *= alpha_sq / (n + 1)
        ratio = alpha_sq / (n + 2)
        if ratio < 1.0 and term / (1.0 - ratio) < tol:
            return weights
    raise ConvergenceError(
        f"Poisson series for alpha_sq={alpha_sq} not converged within {max_terms} terms")


def optimal_conclusive_probability(alpha_sq: float, tol: float = 1e-15,
                                   max_terms: int = 500) -> float:
    weights = class_weights(alpha_sq, tol, max_terms)
    return min(1.0, N_STATES * min(weights))
