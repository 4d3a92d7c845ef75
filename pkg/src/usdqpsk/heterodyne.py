"""Heterodyne emulation of unambiguous discrimination.

Outcomes follow the Q-function of the attenuated coherent state: the two
quadratures are independent normals with per-axis variance 1/2 centred on
``sqrt(eta) * alpha_m``. Conclusive outcomes are assigned the quadrant of
(x, p). Two inconclusive regions with a single threshold ``t`` are supported:

``"cross"``
    bands ``|x| < t`` or ``|p| < t`` around both axes; an outcome is kept
    only when both quadrature signs are resolved beyond ``t``.
``"square"``
    the box ``|x| < t`` and ``|p| < t`` around the origin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .errors import ConfigurationError, ConvergenceError
from .physics import check_state

SIGMA = math.sqrt(0.5)
REGIONS = ("cross", "square")
_SIGNS = ((1, 1), (-1, 1), (-1, -1), (1, -1))  # quadrant of phase (2m+1) pi / 4


@dataclass(frozen=True)
class HeterodyneModel:
    threshold: float = 0.0
    eta: float = 1.0
    region: str = "cross"

    def __post_init__(self) -> None:
        if not (self.threshold >= 0.0 and math.isfinite(self.threshold)):
            raise ConfigurationError(f"threshold must be finite and >= 0, got {self.threshold!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigurationError(f"eta must lie in [0, 1], got {self.eta!r}")
        if self.region not in REGIONS:
            raise ConfigurationError(f"region must be one of {REGIONS}, got {self.region!r}")


def quadrature_mean(alpha_sq: float, eta: float = 1.0) -> float:
    """Magnitude of the mean of each quadrature, sqrt(eta |alpha|^2 / 2)."""
    if not alpha_sq >= 0:
        raise ConfigurationError("alpha_sq must be >= 0")
    return math.sqrt(eta * alpha_sq / 2.0)


def state_means(m: int, alpha_sq: float, eta: float = 1.0) -> tuple[float, float]:
    sx, sp = _SIGNS[check_state(m)]
    mu = quadrature_mean(alpha_sq, eta)
    return sx * mu, sp * mu


def sample_outcome(m: int, alpha_sq: float, eta: float, rng: np.random.Generator,
                   size: int | None = None):
    """Draw heterodyne outcomes ``x + i p`` for state ``m``."""
    mx, mp = state_means(m, alpha_sq, eta)
    x = rng.normal(mx, SIGMA, size)
    p = rng.normal(mp, SIGMA, size)
    return x + 1j * p


def _axis(mu: float, t: float) -> tuple[float, float, float]:
    """P(x > t), P(|x| > t), P(0 < x < t) for x ~ N(mu, 1/2), mu >= 0.

    Tail masses are evaluated directly so that tiny conclusive probabilities
    keep full relative precision.
    """
    beyond = float(ndtr((mu - t) / SIGMA))
    outside = beyond + float(ndtr((-t - mu) / SIGMA))
    near = float(ndtr(mu / SIGMA) - ndtr((mu - t) / SIGMA))
    return beyond, outside, near


def conclusive_probability(model: HeterodyneModel, alpha_sq: float) -> float:
    """Probability of a conclusive outcome; the same for every state."""
    mu = quadrature_mean(alpha_sq, model.eta)
    _, outside, _ = _axis(mu, model.threshold)
    if model.region == "square":
        return outside * (2.0 - outside)
    return outside * outside


def _correct_probability(model: HeterodyneModel, mu: float) -> float:
    # first-quadrant state
    beyond, _, near = _axis(mu, model.threshold)
    if model.region == "square":
        return (beyond + near) ** 2 - near ** 2
    return beyond ** 2


def error_probability(model: HeterodyneModel, alpha_sq: float,
                      method: str = "analytic") -> float:
    """Fraction of conclusive outcomes that land in a wrong quadrant.

    ``method="analytic"`` factorises the Gaussian over the two axes;
    ``method="quadrature"`` integrates the density over the wrong conclusive
    region with adaptive 2-D quadrature (relative tolerance 1e-9).
    """
    pc = conclusive_probability(model, alpha_sq)
    if pc <= 0.0:
        return 0.0
    mu = quadrature_mean(alpha_sq, model.eta)
    if method == "analytic":
        wrong = pc - _correct_probability(model, mu)
    elif method == "quadrature":
        wrong = _wrong_by_quadrature(mu, model.threshold, model.region)
    else:
        raise ValueError(f"unknown method {method!r}")
    return min(1.0, max(0.0, wrong / pc))


def _wrong_by_quadrature(mu: float, t: float, region: str) -> float:
    def density(p, x):
        return math.exp(-(x - mu) ** 2 - (p - mu) ** 2) / math.pi

    def box(x0, x1, p0, p1):
        if x1 <= x0 or p1 <= p0:
            return 0.0
        value, _ = integrate.dblquad(density, x0, x1, p0, p1, epsabs=0.0, epsrel=1e-9)
        return value

    inf = math.inf
    # wrong quadrants for the first-quadrant state: (x < 0, p < 0), (x < 0, p > 0), (x > 0, p < 0)
    quadrants = [(-inf, 0.0, -inf, 0.0), (-inf, 0.0, 0.0, inf), (0.0, inf, -inf, 0.0)]
    total = 0.0
    for x0, x1, p0, p1 in quadrants:
        if region == "cross":
            total += box(x0 if x0 < 0 else t, -t if x1 == 0 else x1,
                         p0 if p0 < 0 else t, -t if p1 == 0 else p1)
        else:
            corner = box(max(x0, -t), min(x1, t), max(p0, -t), min(p1, t))
            total += box(x0, x1, p0, p1) - corner
    return total


def match_threshold(target_pc: float, alpha_sq: float, eta: float = 1.0,
                    tol: float = 1e-10, region: str = "cross", max_iter: int = 200) -> float:
    """Threshold whose conclusive probability is within ``tol`` of ``target_pc``.

    Bisection on the threshold; the conclusive probability falls monotonically
    from 1 at ``t = 0``.
    """
    if not 0.0 < target_pc <= 1.0:
        raise ConfigurationError(
            f"target conclusive probability must lie in (0, 1], got {target_pc!r}")

    def pc(t: float) -> float:
        return conclusive_probability(HeterodyneModel(t, eta, region), alpha_sq)

    if pc(0.0) - target_pc <= tol:
        return 0.0
    lo, hi = 0.0, quadrature_mean(alpha_sq, eta) + 10 * SIGMA
    while pc(hi) > target_pc:
        hi *= 2.0
        if hi > 1e6:
            raise ConvergenceError(f"cannot bracket conclusive probability {target_pc}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        value = pc(mid)
        if abs(value - target_pc) <= tol:
            return mid
        if value > target_pc:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(
        f"bisection for conclusive probability {target_pc} did not reach tol={tol} "
        f"in {max_iter} iterations")


def matched_error(target_pc: float, alpha_sq: float, eta: float = 1.0,
                  region: str = "cross", tol: float = 1e-10) -> tuple[float, float]:
    """(threshold, error probability) of the heterodyne receiver whose
    conclusive probability equals ``target_pc``."""
    t = match_threshold(target_pc, alpha_sq, eta, tol, region)
    return t, error_probability(HeterodyneModel(t, eta, region), alpha_sq)


def decide_outcomes(x: np.ndarray, p: np.ndarray, model: HeterodyneModel) -> np.ndarray:
    """Quadrant index per outcome, -1 where inconclusive."""
    quadrant = np.where(x >= 0, np.where(p >= 0, 0, 3), np.where(p >= 0, 1, 2))
    near_x = np.abs(x) < model.threshold
    near_p = np.abs(p) < model.threshold
    inconclusive = (near_x | near_p) if model.region == "cross" else (near_x & near_p)
    return np.where(inconclusive, -1, quadrant)
