"""Flat ``key = value`` experiment configuration.

Blank lines and ``#`` comments are ignored. Every key is optional; see
``FIELDS`` for the defaults. Lists are comma separated and booleans accept
on/off, true/false, yes/no, 1/0. Example::

    sweep = alpha_sq
    start = 0.5
    stop = 4.0
    step = 0.5
    stages = 10
    visibility = 0.994
    dark_rate = 1.5e-3
    timing = on
    methods = adaptive_exact, adaptive_mc, heterodyne_matched
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .engine import DEFAULT_BATCHES, DEFAULT_TRIALS
from .errors import ConfigurationError
from .heterodyne import REGIONS, HeterodyneModel
from .physics import ChannelParams, TimingModel
from .receivers import ReceiverConfig

SWEEP_VARIABLES = ("alpha_sq", "stages", "eta_det")
METHODS = (
    "bound",
    "static_exact",
    "static_mc",
    "adaptive_exact",
    "adaptive_mc",
    "heterodyne_matched",
    "error_ratio_exact",
    "error_ratio_mc",
)


class ConfigError(ConfigurationError):
    """All problems found in a configuration text, one message per entry."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class ExperimentConfig:
    sweep: str = "alpha_sq"
    start: float = 0.5
    stop: float = 4.0
    step: float = 0.5
    alpha_sq: float = 1.0
    stages: int = 10
    eta_path: float = 0.91
    eta_det: float = 0.73
    visibility: float = 1.0
    dark_rate: float = 0.0
    priors: tuple[float, ...] = (0.25, 0.25, 0.25, 0.25)
    timing: bool = False
    signal_duration: float = 60.0
    gap_duration: float = 0.3
    cycle: tuple[int, ...] = (0, 2, 1, 3)
    static_prefix: int = 4
    methods: tuple[str, ...] = ("adaptive_exact", "adaptive_mc")
    heterodyne_eta: float = 1.0
    heterodyne_region: str = "cross"
    seed: int = 0
    trials: int = DEFAULT_TRIALS
    batches: int = DEFAULT_BATCHES
    output: str = "results.csv"

    def points(self) -> list[float]:
        """Sweep values from ``start`` to ``stop`` inclusive."""
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        values = [round(self.start + k * self.step, 12) for k in range(n)]
        if self.sweep == "stages":
            return [int(round(v)) for v in values]
        return values

    def at(self, value) -> "ExperimentConfig":
        """Copy with the sweep variable fixed to ``value``."""
        return dataclasses.replace(self, **{self.sweep: value})

    def channel(self) -> ChannelParams:
        return ChannelParams(self.alpha_sq, self.eta_path, self.eta_det, self.visibility,
                             self.dark_rate, self.priors)

    def timing_model(self) -> TimingModel | None:
        return TimingModel(self.signal_duration, self.gap_duration) if self.timing else None

    def receiver(self, stages: int | None = None) -> ReceiverConfig:
        return ReceiverConfig(self.stages if stages is None else stages, self.cycle,
                              min(self.static_prefix, stages or self.stages), self.timing_model())

    def heterodyne(self, threshold: float = 0.0) -> HeterodyneModel:
        return HeterodyneModel(threshold, self.heterodyne_eta, self.heterodyne_region)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("on", "true", "yes", "1"):
        return True
    if t in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _ints(text: str) -> tuple[int, ...]:
    return tuple(_int(v) for v in text.split(","))


def _words(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


_PARSERS = {
    "sweep": str.strip, "start": float, "stop": float, "step": float,
    "alpha_sq": float, "stages": _int, "eta_path": float, "eta_det": float,
    "visibility": float, "dark_rate": float, "priors": _floats, "timing": _bool,
    "signal_duration": float, "gap_duration": float, "cycle": _ints,
    "static_prefix": _int, "methods": _words, "heterodyne_eta": float,
    "heterodyne_region": str.strip, "seed": _int, "trials": _int, "batches": _int,
    "output": str.strip,
}
FIELDS = {f.name: f.default for f in dataclasses.fields(ExperimentConfig)}
assert set(_PARSERS) == set(FIELDS)


def _range_errors(cfg: ExperimentConfig) -> list[tuple[str, str]]:
    """(key, message) for every range or consistency violation."""
    out = []

    def check(ok: bool, key: str, msg: str) -> None:
        if not ok:
            out.append((key, msg))

    check(cfg.sweep in SWEEP_VARIABLES, "sweep", f"sweep must be one of {SWEEP_VARIABLES}")
    check(cfg.step > 0, "step", "step must be > 0")
    check(cfg.stop >= cfg.start, "stop", "stop must be >= start (empty range)")
    check(cfg.stages >= 4, "stages", "stages must be >= 4")
    check(cfg.alpha_sq >= 0, "alpha_sq", "alpha_sq must be >= 0")
    for key in ("eta_path", "eta_det", "visibility", "heterodyne_eta"):
        check(0.0 <= getattr(cfg, key) <= 1.0, key, f"{key} must lie in [0, 1]")
    check(cfg.dark_rate >= 0, "dark_rate", "dark_rate must be >= 0")
    check(len(cfg.priors) == 4 and all(0 <= p <= 1 for p in cfg.priors)
          and abs(math.fsum(cfg.priors) - 1) <= 1e-12,
          "priors", "priors must be 4 probabilities summing to 1")
    check(cfg.signal_duration > 0, "signal_duration", "signal_duration must be > 0")
    check(cfg.gap_duration >= 0, "gap_duration", "gap_duration must be >= 0")
    check(sorted(cfg.cycle) == [0, 1, 2, 3], "cycle", "cycle must be a permutation of 0,1,2,3")
    check(0 <= cfg.static_prefix <= 4, "static_prefix", "static_prefix must lie in [0, 4]")
    unknown = [m for m in cfg.methods if m not in METHODS]
    check(not unknown, "methods", f"unknown methods {unknown}; choose from {METHODS}")
    check(bool(cfg.methods), "methods", "at least one method is required")
    check(cfg.heterodyne_region in REGIONS, "heterodyne_region",
          f"heterodyne_region must be one of {REGIONS}")
    check(cfg.seed >= 0, "seed", "seed must be >= 0")
    check(cfg.trials >= 1, "trials", "trials must be >= 1")
    check(cfg.batches >= 2, "batches", "batches must be >= 2")
    check(bool(cfg.output), "output", "output path must not be empty")
    if not out and cfg.sweep in SWEEP_VARIABLES:
        for value in cfg.points():
            point = cfg.at(value)
            if cfg.sweep == "stages" and value < 4:
                out.append(("start", f"swept stages must be >= 4, got {value}"))
                break
            if cfg.sweep == "eta_det" and not 0 <= value <= 1:
                out.append(("stop", f"swept eta_det must lie in [0, 1], got {value}"))
                break
            if cfg.sweep == "alpha_sq" and value < 0:
                out.append(("start", f"swept alpha_sq must be >= 0, got {value}"))
                break
            try:
                point.receiver()
            except ConfigurationError as exc:
                out.append(("gap_duration", str(exc)))
                break
    return out


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    errors: list[str] = []
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        if key not in _PARSERS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in lines:
            errors.append(f"line {lineno}: duplicate key {key!r} (first on line {lines[key]})")
            continue
        lines[key] = lineno
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            errors.append(f"line {lineno}: bad value for {key!r}: {exc}")
    if errors:
        raise ConfigError(errors)
    cfg = ExperimentConfig(**values)
    problems = _range_errors(cfg)
    if problems:
        raise ConfigError([
            f"line {lines[key]}: {msg}" if key in lines else f"{key} (default): {msg}"
            for key, msg in problems
        ])
    return cfg


def _format(value) -> str:
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    return "".join(f"{name} = {_format(getattr(cfg, name))}\n" for name in FIELDS)
