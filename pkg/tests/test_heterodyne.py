import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usdqpsk.engine import RunPlan, estimate
from usdqpsk.errors import ConfigurationError
from usdqpsk.heterodyne import (
    REGIONS,
    HeterodyneModel,
    conclusive_probability,
    decide_outcomes,
    error_probability,
    match_threshold,
    matched_error,
    sample_outcome,
    state_means,
)
from usdqpsk.physics import ChannelParams


def test_square_region_example():
    model = HeterodyneModel(math.sqrt(0.5), region="square")
    assert conclusive_probability(model, 1.0) == pytest.approx(0.77223, abs=1e-5)


def test_square_region_threshold_match():
    assert match_threshold(0.77223, 1.0, region="square") == pytest.approx(0.70711, abs=1e-4)


@pytest.mark.parametrize("region", REGIONS)
def test_zero_threshold_keeps_everything(region):
    model = HeterodyneModel(0.0, region=region)
    assert conclusive_probability(model, 1.0) == 1.0
    # quadrant error of the bare quadrature signs
    q = 0.5 * math.erfc(1 / math.sqrt(2))  # P(x < 0) for mean sqrt(1/2), sigma sqrt(1/2)
    assert error_probability(model, 1.0) == pytest.approx(1 - (1 - q) ** 2, abs=1e-12)
    assert error_probability(model, 1.0) == pytest.approx(0.29214, abs=1e-5)
    assert error_probability(model, 0.0) == pytest.approx(0.75, abs=1e-12)


@pytest.mark.parametrize("region", REGIONS)
def test_threshold_trades_rate_for_accuracy(region):
    loose, tight = HeterodyneModel(0.0, region=region), HeterodyneModel(1.0, region=region)
    assert error_probability(tight, 1.0) < error_probability(loose, 1.0)
    assert conclusive_probability(tight, 1.0) < conclusive_probability(loose, 1.0)


@pytest.mark.parametrize("region", REGIONS)
@pytest.mark.parametrize("alpha_sq,t", [(0.5, 0.3), (1.0, 0.7), (3.0, 1.2), (2.0, 0.0)])
def test_analytic_error_matches_quadrature(region, alpha_sq, t):
    model = HeterodyneModel(t, region=region)
    assert error_probability(model, alpha_sq) == pytest.approx(
        error_probability(model, alpha_sq, method="quadrature"), rel=1e-7, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 6.0), st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.sampled_from(REGIONS))
def test_conclusive_probability_falls_with_threshold(alpha_sq, t1, t2, region):
    lo, hi = sorted((t1, t2))
    p_lo = conclusive_probability(HeterodyneModel(lo, region=region), alpha_sq)
    p_hi = conclusive_probability(HeterodyneModel(hi, region=region), alpha_sq)
    assert 0.0 <= p_hi <= p_lo + 1e-15 <= 1.0 + 1e-15


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.0, 1.0), st.sampled_from(REGIONS))
def test_error_probability_in_range(t, eta, region):
    for alpha_sq in (0.0, 0.7, 4.0):
        e = error_probability(HeterodyneModel(t, eta, region), alpha_sq)
        assert 0.0 <= e <= 0.75 + 1e-12


@pytest.mark.parametrize("region", REGIONS)
@pytest.mark.parametrize("q", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_threshold_round_trip(region, q):
    t = match_threshold(q, 1.5, region=region)
    assert conclusive_probability(HeterodyneModel(t, region=region), 1.5) == pytest.approx(q, abs=1e-10)
    t2, err = matched_error(q, 1.5, region=region)
    assert t2 == t and err == error_probability(HeterodyneModel(t, region=region), 1.5)


def test_full_rate_needs_no_threshold():
    assert match_threshold(1.0, 2.0) == 0.0


def test_bad_target_rejected():
    for target in (0.0, -0.1, 1.5):
        with pytest.raises(ConfigurationError):
            match_threshold(target, 1.0)


def test_model_validation():
    with pytest.raises(ConfigurationError):
        HeterodyneModel(-1.0)
    with pytest.raises(ConfigurationError):
        HeterodyneModel(0.5, eta=1.2)
    with pytest.raises(ConfigurationError):
        HeterodyneModel(0.5, region="disk")


def test_state_means_sit_in_their_quadrants():
    signs = [tuple(np.sign(state_means(m, 2.0))) for m in range(4)]
    assert signs == [(1, 1), (-1, 1), (-1, -1), (1, -1)]
    assert math.hypot(*state_means(0, 2.0)) == pytest.approx(math.sqrt(2.0))


@pytest.mark.parametrize("m", range(4))
def test_sample_moments(m):
    rng = np.random.default_rng(123 + m)
    z = sample_outcome(m, 2.0, 0.8, rng, size=40000)
    mx, mp = state_means(m, 2.0, 0.8)
    se = math.sqrt(0.5 / z.size)
    assert abs(z.real.mean() - mx) < 4 * se
    assert abs(z.imag.mean() - mp) < 4 * se
    assert z.real.var() == pytest.approx(0.5, rel=0.03)


def test_decide_outcomes_regions():
    x = np.array([1.0, 0.1, -1.0, 0.1, 2.0])
    p = np.array([1.0, 1.0, -0.2, 0.1, -2.0])
    cross = decide_outcomes(x, p, HeterodyneModel(0.5, region="cross"))
    square = decide_outcomes(x, p, HeterodyneModel(0.5, region="square"))
    assert cross.tolist() == [0, -1, -1, -1, 3]
    assert square.tolist() == [0, 0, 2, -1, 3]


@pytest.mark.parametrize("region", REGIONS)
def test_monte_carlo_agrees_with_analytic(region):
    model = HeterodyneModel(0.6, region=region)
    plan = RunPlan(ChannelParams(1.5), "heterodyne", heterodyne=model, seed=3,
                   n_trials=40000, n_batches=5)
    est = estimate(plan)
    pc = conclusive_probability(model, 1.5)
    pe = error_probability(model, 1.5)
    assert abs(est.p_conclusive - pc) < 3 * est.p_conclusive_binom_se
    assert abs(est.p_error - pe) < 3 * est.p_error_binom_se
