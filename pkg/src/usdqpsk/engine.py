"""Deterministic, parallel Monte Carlo estimation of P_C and P_E.

Randomness is counter based. Trial ``t`` of batch ``b`` under master seed
``s`` owns the 64-bit seed ``derive_trial_seed(s, b, t)``, and its k-th draw
(k = 0, 1, ...) is the k-th output of a SplitMix64 generator started from
that seed. Draw 0 selects the true state from the priors; the remaining draws
are consumed by the receiver (one per stage, or two per heterodyne outcome).
Results are therefore independent of scheduling and worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .heterodyne import SIGMA, HeterodyneModel, decide_outcomes, state_means
from .physics import N_STATES, ChannelParams
from .receivers import ReceiverConfig, simulate_batch

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_TO_UNIT = 2.0 ** -53

STRATEGIES = ("static", "adaptive", "heterodyne")
DEFAULT_TRIALS = 300 * 20 * 4
DEFAULT_BATCHES = 5
CHUNK = 20000


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
    return z ^ (z >> np.uint64(31))


def derive_trial_seed(master_seed: int, batch: int, trial: int) -> int:
    """64-bit seed of one trial.

    ``mix64(mix64(master) + (batch << 32 | trial) * GOLDEN)`` with the
    SplitMix64 finaliser ``mix64``; injective in (batch, trial) for a fixed
    master seed because the finaliser is a bijection and GOLDEN is odd.
    """
    if not (0 <= batch < 1 << 32 and 0 <= trial < 1 << 32):
        raise ConfigurationError("batch and trial indices must lie in [0, 2**32)")
    key = _mix64(master_seed & MASK64)
    return _mix64((key + ((batch << 32 | trial) * GOLDEN & MASK64)) & MASK64)


def _trial_seeds(master_seed: int, batch: int, start: int, stop: int) -> np.ndarray:
    key = np.uint64(_mix64(master_seed & MASK64))
    counters = (np.uint64(batch) << np.uint64(32)) | np.arange(start, stop, dtype=np.uint64)
    return _mix64_array(key + counters * np.uint64(GOLDEN))


def _stream_uniforms(seeds: np.ndarray, n_draws: int) -> np.ndarray:
    steps = np.array([(k + 1) * GOLDEN & MASK64 for k in range(n_draws)], dtype=np.uint64)
    bits = _mix64_array(seeds[:, None] + steps[None, :]) >> np.uint64(11)
    return bits.astype(np.float64) * _TO_UNIT


class TrialStream:
    """SplitMix64 stream of uniforms on [0, 1) for one trial."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.count = 0

    def random(self) -> float:
        self.count += 1
        z = _mix64((self.seed + self.count * GOLDEN) & MASK64)
        return (z >> 11) * _TO_UNIT


def sample_state(u: float | np.ndarray, priors) -> int | np.ndarray:
    """Map uniform draw(s) to state indices by inverting the prior CDF."""
    cdf = np.cumsum(priors)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), N_STATES - 1)
    return int(idx) if np.ndim(idx) == 0 else idx


@dataclass(frozen=True)
class RunPlan:
    params: ChannelParams
    strategy: str = "adaptive"
    config: ReceiverConfig | None = None
    heterodyne: HeterodyneModel | None = None
    seed: int = 0
    n_trials: int = DEFAULT_TRIALS
    n_batches: int = DEFAULT_BATCHES

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.n_trials < 1:
            raise ConfigurationError("n_trials must be >= 1")
        if self.n_batches < 2:
            raise ConfigurationError("n_batches must be >= 2 for error bars")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")
        if self.strategy == "heterodyne" and self.heterodyne is None:
            raise ConfigurationError("heterodyne strategy needs a HeterodyneModel")
        if self.strategy == "static":
            config = self.config or ReceiverConfig(4)
            if config.stages != 4:
                raise ConfigurationError("the static receiver has exactly 4 stages")
            object.__setattr__(self, "config", config)
        elif self.strategy == "adaptive" and self.config is None:
            raise ConfigurationError("adaptive strategy needs a ReceiverConfig")

    @property
    def draws_per_trial(self) -> int:
        if self.strategy == "heterodyne":
            return 3
        return 1 + self.config.stages


@dataclass(frozen=True)
class PerformanceEstimate:
    """Batch-mean P_C and P_E with standard errors across batches.

    ``per_state`` holds, per true state, (trials, conclusive, wrong) counts
    pooled over batches.
    """

    p_conclusive: float
    p_conclusive_se: float
    p_error: float
    p_error_se: float
    batch_conclusive: tuple[float, ...]
    batch_error: tuple[float, ...]
    zero_conclusive_batches: tuple[int, ...]
    n_trials: int
    conclusive_count: int
    wrong_count: int
    per_state: tuple[tuple[int, int, int], ...] = field(default=())

    @property
    def p_conclusive_binom_se(self) -> float:
        p = self.conclusive_count / self.n_trials
        return math.sqrt(p * (1 - p) / self.n_trials)

    @property
    def p_error_binom_se(self) -> float:
        if self.conclusive_count == 0:
            return 0.0
        p = self.wrong_count / self.conclusive_count
        return math.sqrt(p * (1 - p) / self.conclusive_count)


def _simulate_chunk(plan: RunPlan, batch: int, start: int, stop: int) -> np.ndarray:
    """Counts[state, (trials, conclusive, wrong)] for one slice of one batch."""
    seeds = _trial_seeds(plan.seed, batch, start, stop)
    u = _stream_uniforms(seeds, plan.draws_per_trial)
    states = sample_state(u[:, 0], plan.params.priors)
    if plan.strategy == "heterodyne":
        model = plan.heterodyne
        radius = np.sqrt(-2.0 * np.log1p(-u[:, 1])) * SIGMA
        means = np.array([state_means(m, plan.params.alpha_sq, model.eta) for m in range(N_STATES)])
        x = means[states, 0] + radius * np.cos(2 * np.pi * u[:, 2])
        p = means[states, 1] + radius * np.sin(2 * np.pi * u[:, 2])
        verdict = decide_outcomes(x, p, model)
    else:
        verdict = simulate_batch(states, u[:, 1:], plan.params, plan.config)
    conclusive = verdict >= 0
    wrong = conclusive & (verdict != states)
    counts = np.zeros((N_STATES, 3), dtype=np.int64)
    counts[:, 0] = np.bincount(states, minlength=N_STATES)
    counts[:, 1] = np.bincount(states[conclusive], minlength=N_STATES)
    counts[:, 2] = np.bincount(states[wrong], minlength=N_STATES)
    return counts


def batch_counts(plan: RunPlan, workers: int = 1, chunk: int = CHUNK) -> np.ndarray:
    """Integer counts of shape (n_batches, 4, 3); see :func:`_simulate_chunk`."""
    jobs = [(b, s, min(s + chunk, plan.n_trials))
            for b in range(plan.n_batches) for s in range(0, plan.n_trials, chunk)]
    totals = np.zeros((plan.n_batches, N_STATES, 3), dtype=np.int64)
    if workers <= 1:
        results = [_simulate_chunk(plan, *job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _simulate_chunk(plan, *job), jobs))
    for (b, _, _), counts in zip(jobs, results):
        totals[b] += counts
    return totals


def summarize(counts: np.ndarray) -> PerformanceEstimate:
    per_batch = counts.sum(axis=1)  # (n_batches, 3)
    n = per_batch[:, 0].astype(float)
    conc = per_batch[:, 1].astype(float)
    wrong = per_batch[:, 2].astype(float)
    pc = conc / n
    zero = tuple(int(b) for b in np.flatnonzero(conc == 0))
    pe = np.divide(wrong, conc, out=np.zeros_like(wrong), where=conc > 0)
    k = len(pc)
    pooled = counts.sum(axis=0)
    return PerformanceEstimate(
        p_conclusive=float(pc.mean()),
        p_conclusive_se=float(pc.std(ddof=1) / math.sqrt(k)),
        p_error=float(pe.mean()),
        p_error_se=float(pe.std(ddof=1) / math.sqrt(k)),
        batch_conclusive=tuple(float(v) for v in pc),
        batch_error=tuple(float(v) for v in pe),
        zero_conclusive_batches=zero,
        n_trials=int(n.sum()),
        conclusive_count=int(conc.sum()),
        wrong_count=int(wrong.sum()),
        per_state=tuple(tuple(int(v) for v in row) for row in pooled),
    )


def estimate(plan: RunPlan, workers: int = 1) -> PerformanceEstimate:
    return summarize(batch_counts(plan, workers))
