"""Experiment configuration: defaults, validation and round-tripping."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

EXPERIMENTS = (
    "packing",
    "divergence",
    "fano",
    "meta_verify",
    "theorem2",
    "theorem3",
    "identify",
    "control_regret",
    "pe_check",
    "min_time",
)
MODEL_KINDS = ("linear_gaussian", "scalar_nonlinear_gaussian", "tabular_finite")
CONTROLLERS = ("zero", "linear_feedback", "certainty_equivalence", "oracle", "tabular_policy")
IDENTIFIERS = ("maximum_likelihood", "nearest_least_squares", "constant_guess")
AUX_KINDS = ("exact_conditional_mixture", "nominal_model", "fixed_gaussian_zero_mean", "fixed_uniform", "plug_in_schedule")
BASES = ("tanh", "sin", "cos")
MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass
class ExperimentConfig:
    """Every field has a default; see README for the meaning of each."""

    experiment: str = "fano"
    base_seed: int = 0
    trials: int = 2000
    workers: int = 1
    output_path: Optional[str] = None

    model_kind: str = "linear_gaussian"
    dimension: int = 1
    noise_variance: float = 1.0
    initial_second_moment: float = 0.0
    basis: list = field(default_factory=lambda: ["tanh"])
    points: Optional[list] = None  # explicit parameter points; overrides the grid
    grid_radius: float = 1.0
    grid_resolution: float = 0.25
    separation: float = 0.5

    horizon: int = 5
    horizons: list = field(default_factory=lambda: [10, 20, 50, 100])
    epsilons: list = field(default_factory=lambda: [0.25, 0.5, 1.0])

    controller: str = "zero"
    gain: Optional[list] = None
    policy_table: Optional[list] = None
    update_period: int = 1
    dither_amplitude: float = 0.5
    dither_seed: int = 0

    identifier: str = "maximum_likelihood"
    initial_guess: int = 0
    aux: str = "exact_conditional_mixture"
    aux_variance: float = 1.0
    num_hypotheses: int = 2
    mutual_info: float = 0.0

    pe_constant: float = 0.1
    pe_confidence: float = 0.2
    b_n: Optional[float] = None
    rate_power: float = 2.0

    def to_dict(self) -> dict:
        return asdict(self)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return (isinstance(v, (int, float)) and not isinstance(v, bool)) and math.isfinite(v)


def _check(errors, name, ok, msg):
    if not ok:
        errors.append(f"{name}: {msg}")


def _num_list(v) -> bool:
    return isinstance(v, list) and len(v) > 0 and all(_is_num(x) for x in v)


def _nested_nums(v) -> bool:
    if isinstance(v, list):
        return all(_nested_nums(x) for x in v)
    return _is_num(v)


def validate_config(raw) -> ExperimentConfig:
    """Fill defaults and validate; raises ConfigError listing every bad field."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(["<root>: configuration must be a JSON object"])
    known = {f.name for f in fields(ExperimentConfig)}
    errors = [f"{k}: unknown key" for k in sorted(raw) if k not in known]
    cfg = ExperimentConfig(**{k: v for k, v in raw.items() if k in known})
    e = errors

    _check(e, "experiment", cfg.experiment in EXPERIMENTS, f"must be one of {', '.join(EXPERIMENTS)}")
    _check(e, "base_seed", _is_int(cfg.base_seed) and 0 <= cfg.base_seed <= MAX_SEED, "must be a 64-bit unsigned integer")
    _check(e, "trials", _is_int(cfg.trials) and cfg.trials >= 2, "must be an integer >= 2")
    _check(e, "workers", _is_int(cfg.workers) and cfg.workers >= 1, "must be an integer >= 1")
    _check(e, "output_path", cfg.output_path is None or isinstance(cfg.output_path, str), "must be a string or null")
    _check(e, "model_kind", cfg.model_kind in MODEL_KINDS, f"must be one of {', '.join(MODEL_KINDS)}")
    _check(e, "dimension", _is_int(cfg.dimension) and 1 <= cfg.dimension <= 3, "must be an integer in 1..3")
    _check(e, "noise_variance", _is_num(cfg.noise_variance) and cfg.noise_variance > 0, "must be positive")
    _check(
        e,
        "initial_second_moment",
        _is_num(cfg.initial_second_moment) and cfg.initial_second_moment >= 0,
        "must be nonnegative",
    )
    _check(
        e,
        "basis",
        isinstance(cfg.basis, list) and len(cfg.basis) > 0 and all(b in BASES for b in cfg.basis),
        f"must be a nonempty list drawn from {', '.join(BASES)}",
    )
    _check(e, "points", cfg.points is None or (isinstance(cfg.points, list) and len(cfg.points) > 0 and _nested_nums(cfg.points)), "must be a nonempty nested list of numbers")
    _check(e, "grid_radius", _is_num(cfg.grid_radius) and cfg.grid_radius > 0, "must be positive")
    _check(e, "grid_resolution", _is_num(cfg.grid_resolution) and cfg.grid_resolution > 0, "must be positive")
    _check(e, "separation", _is_num(cfg.separation) and cfg.separation > 0, "must be positive")
    _check(e, "horizon", _is_int(cfg.horizon) and cfg.horizon >= 1, "must be an integer >= 1")
    _check(
        e,
        "horizons",
        isinstance(cfg.horizons, list)
        and len(cfg.horizons) > 0
        and all(_is_int(t) and t >= 1 for t in cfg.horizons)
        and all(b > a for a, b in zip(cfg.horizons, cfg.horizons[1:])),
        "must be a strictly ascending list of integers >= 1",
    )
    _check(
        e,
        "epsilons",
        _num_list(cfg.epsilons) and all(x > 0 for x in cfg.epsilons) and all(b > a for a, b in zip(cfg.epsilons, cfg.epsilons[1:])),
        "must be a strictly ascending list of positive numbers",
    )
    _check(e, "controller", cfg.controller in CONTROLLERS, f"must be one of {', '.join(CONTROLLERS)}")
    _check(e, "gain", cfg.gain is None or (isinstance(cfg.gain, list) and _nested_nums(cfg.gain)), "must be a nested list of numbers or null")
    _check(e, "policy_table", cfg.policy_table is None or (isinstance(cfg.policy_table, list) and _nested_nums(cfg.policy_table)), "must be a nested list of numbers or null")
    _check(e, "update_period", _is_int(cfg.update_period) and cfg.update_period >= 1, "must be an integer >= 1")
    _check(e, "dither_amplitude", _is_num(cfg.dither_amplitude) and cfg.dither_amplitude >= 0, "must be nonnegative")
    _check(e, "dither_seed", _is_int(cfg.dither_seed) and 0 <= cfg.dither_seed <= MAX_SEED, "must be a 64-bit unsigned integer")
    _check(e, "identifier", cfg.identifier in IDENTIFIERS, f"must be one of {', '.join(IDENTIFIERS)}")
    _check(e, "initial_guess", _is_int(cfg.initial_guess) and cfg.initial_guess >= 0, "must be a nonnegative index")
    _check(e, "aux", cfg.aux in AUX_KINDS, f"must be one of {', '.join(AUX_KINDS)}")
    _check(e, "aux_variance", _is_num(cfg.aux_variance) and cfg.aux_variance > 0, "must be positive")
    _check(e, "num_hypotheses", _is_int(cfg.num_hypotheses) and cfg.num_hypotheses >= 2, "must be an integer >= 2")
    _check(e, "mutual_info", _is_num(cfg.mutual_info) and cfg.mutual_info >= 0, "must be nonnegative")
    _check(e, "pe_constant", _is_num(cfg.pe_constant) and cfg.pe_constant > 0, "must be positive")
    _check(e, "pe_confidence", _is_num(cfg.pe_confidence) and 0 < cfg.pe_confidence < 1, "must lie in (0, 1)")
    _check(e, "b_n", cfg.b_n is None or _is_num(cfg.b_n), "must be a number or null")
    _check(e, "rate_power", _is_num(cfg.rate_power) and cfg.rate_power >= 1, "must be >= 1")
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError([f"<file>: cannot read {path}: {exc.strerror}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"<file>: not valid JSON ({exc.msg} at line {exc.lineno})"]) from exc
    return validate_config(raw)
