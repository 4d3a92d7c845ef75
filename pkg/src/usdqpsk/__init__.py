"""Unambiguous discrimination of QPSK coherent states with displacement and
on/off photon detection, with static, adaptive and heterodyne receivers."""

from .bounds import optimal_conclusive_probability
from .engine import PerformanceEstimate, RunPlan, derive_trial_seed, estimate
from .errors import (
    ConfigurationError,
    ConvergenceError,
    NoHypothesisError,
    ResourceLimitError,
)
from .heterodyne import (
    HeterodyneModel,
    conclusive_probability,
    error_probability,
    match_threshold,
    sample_outcome,
)
from .physics import (
    ChannelParams,
    TimingModel,
    discard_factor,
    off_probability,
    on_probability,
    p_shorthand,
)
from .receivers import (
    Decision,
    LookupTable,
    ReceiverConfig,
    TrialRecord,
    build_lookup_table,
    decide,
    enumerate_exact,
    next_hypothesis,
    run_trial,
    static_closed_form,
)

__version__ = "0.1.0"
