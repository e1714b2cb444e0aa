"""Flat, typed experiment configuration.

A config file is a TOML document of top-level ``key = value`` pairs. Every
key can also be given on the command line as ``--key value``. Keys left
unset fall back to the per-experiment defaults in ``EXPERIMENT_DEFAULTS``.
"""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXPERIMENTS = ("integrator", "sweep", "vehicle")


class ConfigError(ValueError):
    """Invalid configuration value; the message starts with the field name."""


@dataclass
class ExperimentConfig:
    experiment: str = "integrator"
    sample_size: Optional[int] = None
    state_sigma: float = 3.0
    control_sigma: float = 3.0
    regularization: Optional[float] = None
    step_size: Optional[float] = None
    max_iters: int = 100
    grad_tol: float = 1e-6
    seed: int = 0
    sampling_time: float = 0.1
    noise_std: float = 0.1
    eval_grid: list = field(default_factory=lambda: [11, 11])
    admissible: Optional[list] = None
    horizon: int = 20
    target: Optional[str] = None
    out: str = "out"
    sweep_sizes: list = field(default_factory=lambda: [250, 1000, 2500])
    repeats: int = 20
    discretization: str = "exact"
    wrap_heading: bool = True

    def resolved(self) -> "ExperimentConfig":
        """Copy with per-experiment defaults filled in and every field validated."""
        cfg = dataclasses.replace(self)
        if cfg.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment: must be one of {', '.join(EXPERIMENTS)}, got {cfg.experiment!r}")
        for key, value in EXPERIMENT_DEFAULTS[cfg.experiment].items():
            if getattr(cfg, key) is None:
                setattr(cfg, key, value)
        _validate(cfg)
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# published hyperparameters per benchmark; sweep re-runs the integrator setup
EXPERIMENT_DEFAULTS = {
    "integrator": {"sample_size": 1600, "step_size": 0.01, "admissible": [21]},
    "sweep": {"sample_size": 1600, "step_size": 0.01, "admissible": [21]},
    "vehicle": {"sample_size": 3000, "step_size": 0.1, "admissible": [10, 21]},
}

FIELD_TYPES = {
    "experiment": str,
    "sample_size": int,
    "state_sigma": float,
    "control_sigma": float,
    "regularization": float,
    "step_size": float,
    "max_iters": int,
    "grad_tol": float,
    "seed": int,
    "sampling_time": float,
    "noise_std": float,
    "eval_grid": list,
    "admissible": list,
    "horizon": int,
    "target": str,
    "out": str,
    "sweep_sizes": list,
    "repeats": int,
    "discretization": str,
    "wrap_heading": bool,
}
NULLABLE = {"sample_size", "regularization", "step_size", "admissible", "target"}


def _positive_int(cfg, name):
    v = getattr(cfg, name)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ConfigError(f"{name}: must be a positive integer, got {v!r}")


def _positive_float(cfg, name, allow_inf=False):
    v = getattr(cfg, name)
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0 or (math.isinf(v) and not allow_inf):
        raise ConfigError(f"{name}: must be a positive number, got {v!r}")


def _int_list(cfg, name, length=None):
    v = getattr(cfg, name)
    if not isinstance(v, list) or not v or any(
        not isinstance(c, int) or isinstance(c, bool) or c < 1 for c in v
    ):
        raise ConfigError(f"{name}: must be a non-empty list of positive integers, got {v!r}")
    if length is not None and len(v) != length:
        raise ConfigError(f"{name}: needs {length} entries, got {len(v)}")


def _validate(cfg: ExperimentConfig):
    for name in ("sample_size", "max_iters", "horizon", "repeats"):
        _positive_int(cfg, name)
    for name in ("state_sigma", "control_sigma", "step_size", "sampling_time"):
        _positive_float(cfg, name)
    if cfg.regularization is not None:
        _positive_float(cfg, "regularization")
    if not isinstance(cfg.grad_tol, (int, float)) or not cfg.grad_tol >= 0:
        raise ConfigError(f"grad_tol: must be non-negative, got {cfg.grad_tol!r}")
    if not isinstance(cfg.noise_std, (int, float)) or not (cfg.noise_std >= 0 and math.isfinite(cfg.noise_std)):
        raise ConfigError(f"noise_std: must be non-negative and finite, got {cfg.noise_std!r}")
    if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool) or cfg.seed < 0:
        raise ConfigError(f"seed: must be a non-negative integer, got {cfg.seed!r}")
    _int_list(cfg, "eval_grid", 2)
    _int_list(cfg, "sweep_sizes")
    _int_list(cfg, "admissible", 2 if cfg.experiment == "vehicle" else 1)
    if cfg.discretization not in ("euler", "exact"):
        raise ConfigError(f"discretization: must be 'euler' or 'exact', got {cfg.discretization!r}")
    if not isinstance(cfg.wrap_heading, bool):
        raise ConfigError(f"wrap_heading: must be true or false, got {cfg.wrap_heading!r}")


def parse_value(name: str, text: str):
    """Parse a command-line string for config field ``name``."""
    kind = FIELD_TYPES[name]
    s = text.strip()
    if name in NULLABLE and s.lower() in ("", "none", "null"):
        return None
    try:
        if kind is int:
            return int(s)
        if kind is float:
            return float(s)
        if kind is bool:
            if s.lower() in ("true", "1", "yes"):
                return True
            if s.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {s!r}")
        if kind is list:
            return [int(p) for p in s.replace("x", ",").split(",") if p.strip()]
        return s
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {text!r} ({exc})") from None


def _coerce(name: str, value):
    kind = FIELD_TYPES[name]
    if value is None:
        return None
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if kind is float and isinstance(value, str) and value.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return value


def load_config(path=None, overrides: dict | None = None, experiment: str | None = None) -> ExperimentConfig:
    """Read a TOML config, apply overrides, and return the resolved config.

    Raises
    ------
    ConfigError
        Unknown keys, unreadable files, or values violating a field constraint.
    """
    values = {}
    if path is not None:
        path = Path(path)
        try:
            with open(path, "rb") as fh:
                values = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config: {path}: {exc}") from None
    values.update(overrides or {})
    if experiment is not None:
        values["experiment"] = experiment
    unknown = sorted(set(values) - set(FIELD_TYPES))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown config key")
    cfg = ExperimentConfig(**{k: _coerce(k, v) for k, v in values.items()})
    return cfg.resolved()
