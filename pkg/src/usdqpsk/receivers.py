"""Static and adaptive displacement + on/off-detection USD receivers.

The receiver splits the signal into ``M`` stages. The first ``static_prefix``
stages test the hypotheses of a fixed cycle (default 0 -> 2 -> 1 -> 3). Every
later stage moves on to the next state in cyclic order after the one tested
at the previous stage, skipping states already ruled out; the stage right
after the prefix therefore tests the first surviving state of the cycle. A
click ("on") rules out the tested state. The outcome is conclusive exactly
when three states were ruled out; a fourth click makes it inconclusive.

Eliminated sets are carried internally as 4-bit masks (bit ``k`` set when
state ``k`` is ruled out).
"""
from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NoHypothesisError, ResourceLimitError
from .physics import (
    N_STATES,
    ChannelParams,
    TimingModel,
    check_state,
    discard_factor,
    off_matrix,
    p_shorthand,
)

ALL_ELIMINATED = (1 << N_STATES) - 1
DEFAULT_CYCLE = (0, 2, 1, 3)
DEFAULT_ENUMERATION_CAP = 20


def mask_of(states: Iterable[int]) -> int:
    mask = 0
    for k in states:
        mask |= 1 << check_state(k)
    return mask


def states_of(mask: int) -> frozenset[int]:
    return frozenset(k for k in range(N_STATES) if mask >> k & 1)


@dataclass(frozen=True)
class ReceiverConfig:
    stages: int = 4
    cycle: tuple[int, ...] = DEFAULT_CYCLE
    static_prefix: int = 4
    timing: TimingModel | None = None

    def __post_init__(self) -> None:
        cycle = tuple(int(k) for k in self.cycle)
        if sorted(cycle) != list(range(N_STATES)):
            raise ConfigurationError(f"cycle must be a permutation of 0..3, got {self.cycle!r}")
        object.__setattr__(self, "cycle", cycle)
        if int(self.stages) != self.stages or self.stages < 4:
            raise ConfigurationError(f"stages must be an integer >= 4, got {self.stages!r}")
        if not 0 <= self.static_prefix <= self.stages:
            raise ConfigurationError(
                f"static_prefix must lie in [0, stages], got {self.static_prefix!r}")
        # raises if the gaps swallow the signal
        discard_factor(self.stages, self.timing)

    @property
    def discard(self) -> float:
        return discard_factor(self.stages, self.timing)

    def effective_alpha_sq(self, params: ChannelParams) -> float:
        return params.alpha_sq * self.discard


def _next_surviving(previous: int, mask: int, cycle: tuple[int, ...]) -> int:
    # cycle order strictly after ``previous``, wrapping round to ``previous`` itself last
    pos = cycle.index(previous)
    for step in range(1, N_STATES + 1):
        k = cycle[(pos + step) % N_STATES]
        if not mask >> k & 1:
            return k
    raise NoHypothesisError("all four states eliminated; the trial is already inconclusive")


def _policy(stage: int, mask: int, previous: int, config: ReceiverConfig) -> int:
    if stage <= config.static_prefix:
        return config.cycle[(stage - 1) % N_STATES]
    return _next_surviving(previous, mask, config.cycle)


def initial_previous(config: ReceiverConfig) -> int:
    """Cycle position before stage 1: the last cycle element, so that the
    search for the first adaptive stage begins at the cycle head."""
    return config.cycle[-1]


def next_hypothesis(stage: int, eliminated: Iterable[int], config: ReceiverConfig,
                    previous: int | None = None) -> int:
    """Hypothesis tested at ``stage`` (1-based).

    ``previous`` is the hypothesis tested at ``stage - 1``; adaptive stages
    resume the cycle right after it. ``None`` resumes from the cycle head,
    which is exact for the first stage after the static prefix.
    """
    mask = mask_of(eliminated)
    if mask == ALL_ELIMINATED:
        raise NoHypothesisError("all four states eliminated; the trial is already inconclusive")
    if not 1 <= stage <= config.stages:
        raise ConfigurationError(f"stage must lie in 1..{config.stages}, got {stage!r}")
    prev = initial_previous(config) if previous is None else check_state(previous, "previous")
    return _policy(stage, mask, prev, config)


PolicyState = tuple[int, int, int]  # (stage, eliminated mask, previous hypothesis)


def reachable_states(config: ReceiverConfig) -> list[PolicyState]:
    """Every (stage, mask, previous) with fewer than four eliminations that
    some outcome sequence reaches, sorted."""
    found = []
    frontier = {(0, initial_previous(config))}
    for stage in range(1, config.stages + 1):
        found.extend((stage, m, p) for m, p in sorted(frontier))
        following = set()
        for m, p in frontier:
            h = _policy(stage, m, p, config)
            following.add((m, h))
            hit = m | 1 << h
            if hit != ALL_ELIMINATED:
                following.add((hit, h))
        frontier = following
    return found


@dataclass(frozen=True)
class LookupTable:
    """Precomputed policy, the software analogue of a hard-coded hardware table.

    Static-prefix stages ignore the history and are stored as one entry per
    stage. Adaptive stages are keyed by (stage, eliminated mask, previous
    hypothesis).
    """

    stages: int
    static: tuple[int, ...]
    adaptive: dict[PolicyState, int] = field(default_factory=dict)
    reachable: frozenset[PolicyState] = frozenset()

    def __len__(self) -> int:
        return len(self.static) + len(self.adaptive)

    def __contains__(self, key: PolicyState) -> bool:
        return key in self.reachable

    def lookup(self, stage: int, eliminated: Iterable[int] | int, previous: int) -> int:
        mask = eliminated if isinstance(eliminated, int) else mask_of(eliminated)
        if (stage, mask, previous) not in self.reachable:
            raise KeyError(f"(stage {stage}, mask {mask}, previous {previous}) is not reachable")
        if stage <= len(self.static):
            return self.static[stage - 1]
        return self.adaptive[stage, mask, previous]

    def rows(self) -> list[tuple[int, int, int, int]]:
        """(stage, previous, mask, hypothesis) for every reachable state, sorted."""
        return sorted((s, p, m, self.lookup(s, m, p)) for s, m, p in self.reachable)

    def to_text(self) -> str:
        return "".join(f"stage {s} previous {p} eliminated {m} hypothesis {h}\n"
                       for s, p, m, h in self.rows())

    @staticmethod
    def parse_text(text: str) -> list[tuple[int, int, int, int]]:
        rows = []
        for lineno, line in enumerate(text.splitlines(), 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 8 or parts[0::2] != ["stage", "previous", "eliminated", "hypothesis"]:
                raise ValueError(f"line {lineno}: malformed lookup-table row {line!r}")
            rows.append(tuple(int(v) for v in parts[1::2]))
        return rows


def build_lookup_table(config: ReceiverConfig) -> LookupTable:
    states = reachable_states(config)
    static = tuple(config.cycle[(j - 1) % N_STATES] for j in range(1, config.static_prefix + 1))
    adaptive = {(s, m, p): _next_surviving(p, m, config.cycle)
                for s, m, p in states if s > config.static_prefix}
    return LookupTable(config.stages, static, adaptive, frozenset(states))


@dataclass
class TrialRecord:
    true_state: int
    stages: list[tuple[int, bool]] = field(default_factory=list)
    on_count: int = 0

    @property
    def eliminated(self) -> frozenset[int]:
        return frozenset(h for h, on in self.stages if on)


@dataclass(frozen=True)
class Decision:
    """Verdict of one trial: ``state`` is the concluded index or ``None``."""

    state: int | None = None

    @property
    def conclusive(self) -> bool:
        return self.state is not None

    def __repr__(self) -> str:
        return f"Conclusive({self.state})" if self.conclusive else "Inconclusive"


INCONCLUSIVE = Decision(None)


def run_trial(true_state: int, params: ChannelParams, config: ReceiverConfig, rng) -> TrialRecord:
    """Simulate one signal through the receiver.

    ``rng`` supplies uniforms on [0, 1) through ``rng.random()``; one draw is
    consumed per executed stage and the stage is "off" when the draw falls
    below the off probability. Stages after the fourth click are skipped.
    """
    m = check_state(true_state)
    poff = off_matrix(params, config.stages, config.effective_alpha_sq(params))
    record = TrialRecord(m)
    mask = 0
    h = initial_previous(config)
    for stage in range(1, config.stages + 1):
        h = _policy(stage, mask, h, config)
        on = not rng.random() < poff[m][h]
        record.stages.append((h, on))
        if on:
            record.on_count += 1
            mask |= 1 << h
            if mask == ALL_ELIMINATED:
                break
    return record


def decide(record: TrialRecord) -> Decision:
    if record.on_count != 3:
        return INCONCLUSIVE
    (survivor,) = set(range(N_STATES)) - record.eliminated
    return Decision(survivor)


def static_closed_form(params: ChannelParams, effective_alpha_sq: float) -> tuple[float, float]:
    """Conclusive and error probabilities of the four-stage static receiver."""
    p0, p1, p2 = (p_shorthand(s, params, effective_alpha_sq) for s in (0, 1, 2))
    correct = p0 * (1 - p2) * (1 - p1) ** 2
    wrong = p2 * (1 - p0) * (1 - p1) ** 2 + 2 * p1 * (1 - p1) * (1 - p0) * (1 - p2)
    pc = correct + wrong
    return pc, (wrong / pc if pc > 0 else 0.0)


def conditional_exact(params: ChannelParams, config: ReceiverConfig,
                      cap: int = DEFAULT_ENUMERATION_CAP) -> list[tuple[float, float]]:
    """Exact (P(conclusive | m), P(wrong conclusive | m)) for each true state.

    Sums the probabilities of all outcome sequences. Sequences reaching the
    same policy state (eliminated set, last hypothesis) share their future,
    so they are merged and propagated stage by stage.
    """
    if config.stages > cap:
        raise ResourceLimitError(
            f"exact enumeration capped at M={cap}; M={config.stages} requested")
    poff = off_matrix(params, config.stages, config.effective_alpha_sq(params))
    out = []
    for m in range(N_STATES):
        dist = {(0, initial_previous(config)): 1.0}
        for stage in range(1, config.stages + 1):
            nxt: dict[tuple[int, int], float] = {}
            for (mask, prev), p in dist.items():
                if mask == ALL_ELIMINATED:
                    nxt[mask, prev] = nxt.get((mask, prev), 0.0) + p
                    continue
                h = _policy(stage, mask, prev, config)
                q = poff[m][h]
                nxt[mask, h] = nxt.get((mask, h), 0.0) + p * q
                hit = mask | 1 << h
                nxt[hit, h] = nxt.get((hit, h), 0.0) + p * (1.0 - q)
            dist = nxt
        conclusive = wrong = 0.0
        for (mask, _), p in dist.items():
            if bin(mask).count("1") == 3:
                conclusive += p
                if mask >> m & 1:
                    wrong += p
        out.append((conclusive, wrong))
    return out


def enumerate_exact(params: ChannelParams, config: ReceiverConfig,
                    cap: int = DEFAULT_ENUMERATION_CAP) -> tuple[float, float]:
    """Prior-weighted exact (P_C, P_E); P_E is 0 when P_C is 0."""
    per_state = conditional_exact(params, config, cap)
    pc = sum(p * c for p, (c, _) in zip(params.priors, per_state))
    wrong = sum(p * w for p, (_, w) in zip(params.priors, per_state))
    return pc, (wrong / pc if pc > 0 else 0.0)


def _policy_arrays(config: ReceiverConfig) -> np.ndarray:
    # hypothesis[stage - 1, mask, previous]; the all-eliminated mask maps to 0 and is never read
    table = np.zeros((config.stages, ALL_ELIMINATED + 1, N_STATES), dtype=np.int64)
    for stage in range(1, config.stages + 1):
        for mask in range(ALL_ELIMINATED):
            for prev in range(N_STATES):
                table[stage - 1, mask, prev] = _policy(stage, mask, prev, config)
    return table


def simulate_batch(true_states: np.ndarray, uniforms: np.ndarray, params: ChannelParams,
                   config: ReceiverConfig) -> np.ndarray:
    """Vectorised :func:`run_trial` + :func:`decide` over many trials.

    ``uniforms[t, j]`` is the draw consumed at stage ``j + 1`` of trial ``t``.
    Returns the concluded state per trial, or -1 for inconclusive.
    """
    true_states = np.asarray(true_states, dtype=np.int64)
    n = true_states.shape[0]
    if uniforms.shape != (n, config.stages):
        raise ValueError(f"uniforms must have shape {(n, config.stages)}, got {uniforms.shape}")
    poff = np.array(off_matrix(params, config.stages, config.effective_alpha_sq(params)))
    policy = _policy_arrays(config)
    mask = np.zeros(n, dtype=np.int64)
    prev = np.full(n, initial_previous(config), dtype=np.int64)
    for j in range(config.stages):
        active = mask != ALL_ELIMINATED
        h = policy[j, mask, prev]
        on = active & ~(uniforms[:, j] < poff[true_states, h])
        mask = np.where(on, mask | (1 << h), mask)
        prev = np.where(active, h, prev)
    popcount = (mask & 1) + (mask >> 1 & 1) + (mask >> 2 & 1) + (mask >> 3 & 1)
    # the survivor of a 3-bit mask is log2 of the missing bit
    survivor = np.array([0, 0, 1, 0, 2, 0, 0, 0, 3, 0, 0, 0, 0, 0, 0, 0])[ALL_ELIMINATED ^ mask]
    return np.where(popcount == 3, survivor, -1)
