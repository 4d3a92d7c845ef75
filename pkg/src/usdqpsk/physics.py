"""QPSK alphabet, detector imperfections and the on/off click model.

A displacement tuned to hypothesis ``i`` acting on the split signal of state
``m`` leaves an off-click probability

    P(off | m; i) = exp(-nu - 2 eta (|alpha|^2 / M) (1 - xi cos((m - i) pi / 2)))

where ``eta`` is the total system efficiency, ``xi`` the displacement
visibility and ``nu`` the dark-count parameter per time bin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigurationError

N_STATES = 4

# cos((m - i) * pi / 2) indexed by (m - i) mod 4; exact zeros avoid 6e-17 residue
_COS_QUARTER_TURN = (1.0, 0.0, -1.0, 0.0)


def _check_unit(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise ConfigurationError(f"{name} must lie in [0, 1], got {value!r}")


def check_state(m: int, name: str = "state") -> int:
    if int(m) != m or not 0 <= m < N_STATES:
        raise ConfigurationError(f"{name} must be one of 0..3, got {m!r}")
    return int(m)


def state_amplitude(m: int, alpha_sq: float) -> complex:
    """Complex amplitude |alpha| exp(i (2m + 1) pi / 4) of the m-th QPSK state."""
    check_state(m)
    return math.sqrt(alpha_sq) * complex(math.cos((2 * m + 1) * math.pi / 4),
                                         math.sin((2 * m + 1) * math.pi / 4))


@dataclass(frozen=True)
class ChannelParams:
    """Signal amplitude and receiver imperfections.

    ``eta_path`` and ``eta_det`` only ever enter through their product
    :attr:`eta`; they are kept apart so detector-efficiency sweeps can hold
    the path transmittance fixed.
    """

    alpha_sq: float
    eta_path: float = 0.91
    eta_det: float = 0.73
    visibility: float = 1.0
    dark_rate: float = 0.0
    priors: tuple[float, ...] = field(default=(0.25, 0.25, 0.25, 0.25))

    def __post_init__(self) -> None:
        if not (self.alpha_sq >= 0.0 and math.isfinite(self.alpha_sq)):
            raise ConfigurationError(f"alpha_sq must be finite and >= 0, got {self.alpha_sq!r}")
        _check_unit("eta_path", self.eta_path)
        _check_unit("eta_det", self.eta_det)
        _check_unit("visibility", self.visibility)
        if not (self.dark_rate >= 0.0 and math.isfinite(self.dark_rate)):
            raise ConfigurationError(f"dark_rate must be finite and >= 0, got {self.dark_rate!r}")
        priors = tuple(float(p) for p in self.priors)
        if len(priors) != N_STATES:
            raise ConfigurationError(f"priors needs {N_STATES} entries, got {len(priors)}")
        for p in priors:
            _check_unit("prior", p)
        if abs(math.fsum(priors) - 1.0) > 1e-12:
            raise ConfigurationError(f"priors must sum to 1, got {math.fsum(priors)!r}")
        object.__setattr__(self, "priors", priors)

    @property
    def eta(self) -> float:
        return self.eta_path * self.eta_det

    @classmethod
    def ideal(cls, alpha_sq: float) -> "ChannelParams":
        """Unit efficiency, perfect visibility, no dark counts."""
        return cls(alpha_sq, eta_path=1.0, eta_det=1.0, visibility=1.0, dark_rate=0.0)

    @classmethod
    def with_system_efficiency(cls, alpha_sq: float, eta: float, **kwargs) -> "ChannelParams":
        """Parameter block specified by total efficiency (path transmittance set to 1)."""
        return cls(alpha_sq, eta_path=1.0, eta_det=eta, **kwargs)


@dataclass(frozen=True)
class TimingModel:
    """Temporal-mode implementation: signal of width ``signal_duration`` split
    into bins separated by discarded gaps of ``gap_duration`` (both in us)."""

    signal_duration: float = 60.0
    gap_duration: float = 0.3

    def __post_init__(self) -> None:
        if not self.signal_duration > 0.0:
            raise ConfigurationError("signal_duration must be positive")
        if not self.gap_duration >= 0.0:
            raise ConfigurationError("gap_duration must be >= 0")


def discard_factor(stages: int, timing: TimingModel | None) -> float:
    """Fraction of the signal energy surviving the inter-bin gaps.

    >>> round(discard_factor(10, TimingModel()), 12)
    0.955
    """
    if int(stages) != stages or stages < 1:
        raise ConfigurationError(f"stage count must be an integer >= 1, got {stages!r}")
    if timing is None:
        return 1.0
    factor = 1.0 - timing.gap_duration * (stages - 1) / timing.signal_duration
    if factor <= 0.0:
        raise ConfigurationError(
            f"gaps of {timing.gap_duration} us between {stages} bins consume the "
            f"whole {timing.signal_duration} us signal"
        )
    return factor


def _off(nu: float, eta: float, alpha_sq: float, stages: int, cos_term: float) -> float:
    return math.exp(-nu - 2.0 * eta * (alpha_sq / stages) * (1.0 - cos_term))


def off_probability(m: int, i: int, params: ChannelParams, stages: int,
                    effective_alpha_sq: float) -> float:
    """Probability of no click when state ``m`` is displaced under hypothesis ``i``.

    ``effective_alpha_sq`` is the mean photon number after any discarding
    loss; the caller applies :func:`discard_factor`.
    """
    check_state(m, "m")
    check_state(i, "hypothesis")
    if int(stages) != stages or stages < 1:
        raise ConfigurationError(f"stage count must be an integer >= 1, got {stages!r}")
    if not effective_alpha_sq >= 0.0:
        raise ConfigurationError("effective_alpha_sq must be >= 0")
    cos_term = params.visibility * _COS_QUARTER_TURN[(m - i) % N_STATES]
    return _off(params.dark_rate, params.eta, effective_alpha_sq, stages, cos_term)


def on_probability(m: int, i: int, params: ChannelParams, stages: int,
                   effective_alpha_sq: float) -> float:
    return 1.0 - off_probability(m, i, params, stages, effective_alpha_sq)


def p_shorthand(s: int, params: ChannelParams, effective_alpha_sq: float) -> float:
    """Off probability of the four-stage receiver at cyclic distance ``s``.

    Equal to ``exp(-nu - (1 - (1 - s) xi) eta |alpha|^2 / 2)``; evaluated
    through the same kernel as :func:`off_probability` so the two agree exactly.
    """
    if s not in (0, 1, 2):
        raise ConfigurationError(f"cyclic distance must be 0, 1 or 2, got {s!r}")
    if not effective_alpha_sq >= 0.0:
        raise ConfigurationError("effective_alpha_sq must be >= 0")
    cos_term = params.visibility * _COS_QUARTER_TURN[s]
    return _off(params.dark_rate, params.eta, effective_alpha_sq, 4, cos_term)


def off_matrix(params: ChannelParams, stages: int, effective_alpha_sq: float) -> list[list[float]]:
    """4x4 table ``[m][i]`` of off probabilities for one stage."""
    return [[off_probability(m, i, params, stages, effective_alpha_sq) for i in range(N_STATES)]
            for m in range(N_STATES)]
