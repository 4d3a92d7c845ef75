import math

import numpy as np
import pytest

from usdqpsk.engine import (
    RunPlan,
    TrialStream,
    _stream_uniforms,
    _trial_seeds,
    batch_counts,
    derive_trial_seed,
    estimate,
    sample_state,
)
from usdqpsk.errors import ConfigurationError
from usdqpsk.physics import ChannelParams, TimingModel
from usdqpsk.receivers import ReceiverConfig, enumerate_exact


def test_frozen_seed_vector():
    assert derive_trial_seed(42, 3, 17) == 1541893757987565253
    stream = TrialStream(derive_trial_seed(42, 3, 17))
    first = [stream.random() for _ in range(3)]
    assert first == [stream_value for stream_value in _stream_uniforms(
        np.array([1541893757987565253], dtype=np.uint64), 3)[0]]


def test_seeds_are_distinct():
    seeds = {derive_trial_seed(7, b, t) for b in range(20) for t in range(2000)}
    assert len(seeds) == 40000
    assert derive_trial_seed(1, 0, 0) != derive_trial_seed(2, 0, 0)


def test_vector_seeds_match_scalar():
    vec = _trial_seeds(9, 4, 100, 164)
    assert vec.tolist() == [derive_trial_seed(9, 4, t) for t in range(100, 164)]


def test_uniforms_in_unit_interval():
    u = _stream_uniforms(_trial_seeds(0, 0, 0, 5000), 12)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 4 * math.sqrt(1 / 12 / u.size)


def test_sample_state_inverts_cdf():
    priors = (0.1, 0.2, 0.3, 0.4)
    assert sample_state(np.array([0.0, 0.099, 0.1, 0.35, 0.65, 0.999999]), priors).tolist() == [
        0, 0, 1, 2, 3, 3]
    assert sample_state(0.25, (0.25,) * 4) == 1


def test_plan_validation():
    params = ChannelParams(1.0)
    with pytest.raises(ConfigurationError):
        RunPlan(params, "adaptive")
    with pytest.raises(ConfigurationError):
        RunPlan(params, "static", ReceiverConfig(5))
    with pytest.raises(ConfigurationError):
        RunPlan(params, "heterodyne")
    with pytest.raises(ConfigurationError):
        RunPlan(params, "static", n_batches=1)
    with pytest.raises(ConfigurationError):
        RunPlan(params, "guess")


def test_worker_count_does_not_change_results():
    plan = RunPlan(ChannelParams(1.5, visibility=0.99, dark_rate=1e-3), "adaptive",
                   ReceiverConfig(10), seed=5, n_trials=9000, n_batches=3)
    one = batch_counts(plan, workers=1, chunk=2000)
    many = batch_counts(plan, workers=8, chunk=2000)
    other_chunking = batch_counts(plan, workers=3, chunk=777)
    assert np.array_equal(one, many)
    assert np.array_equal(one, other_chunking)
    assert estimate(plan) == estimate(plan, workers=4)


def test_ideal_receiver_never_errs():
    est = estimate(RunPlan(ChannelParams.ideal(2.0), "adaptive", ReceiverConfig(10),
                           n_trials=20000, n_batches=4))
    assert est.wrong_count == 0 and est.p_error == 0.0
    assert est.conclusive_count > 0


def test_zero_conclusive_batches_flagged():
    est = estimate(RunPlan(ChannelParams(0.0), "static", n_trials=500, n_batches=3))
    assert est.zero_conclusive_batches == (0, 1, 2)
    assert est.p_conclusive == 0.0 and est.p_error == 0.0


def test_counts_are_consistent():
    est = estimate(RunPlan(ChannelParams(1.0, dark_rate=0.05), "adaptive", ReceiverConfig(8),
                           n_trials=3000, n_batches=4, seed=2))
    assert est.n_trials == 12000
    assert sum(row[0] for row in est.per_state) == 12000
    assert sum(row[1] for row in est.per_state) == est.conclusive_count
    assert sum(row[2] for row in est.per_state) == est.wrong_count


def test_monte_carlo_tracks_exact_over_grid():
    """At least 99 % of 100 grid points lie within 3 binomial standard errors."""
    hits = total = 0
    timing = TimingModel()
    for a in np.linspace(0.2, 5.0, 25):
        for stages in (4, 6, 10, 14):
            params = ChannelParams(float(a), eta_path=1.0, eta_det=0.66, visibility=0.994,
                                   dark_rate=1.5e-3)
            cfg = ReceiverConfig(stages, timing=timing)
            strategy = "static" if stages == 4 else "adaptive"
            est = estimate(RunPlan(params, strategy, cfg, seed=total, n_trials=4000, n_batches=5))
            pc, _ = enumerate_exact(params, cfg)
            hits += abs(est.p_conclusive - pc) <= 3 * est.p_conclusive_binom_se
            total += 1
    assert total == 100
    assert hits >= 99


def test_standard_error_halves_with_four_times_the_trials():
    params = ChannelParams(1.5, eta_path=1.0, eta_det=0.66, visibility=0.994, dark_rate=1.5e-3)
    cfg = ReceiverConfig(10, timing=TimingModel())

    def mean_se(n):
        return np.mean([estimate(RunPlan(params, "adaptive", cfg, seed=s, n_trials=n,
                                         n_batches=5)).p_conclusive_se for s in range(12)])

    ratio = mean_se(2000) / mean_se(8000)
    assert 1.6 < ratio < 2.5
