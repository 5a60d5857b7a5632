"""YAML configuration loading with strict key checking.

The file is a flat tree mirroring the EnvConfig fields, with nested
``quad_params``, ``integrator`` and ``pid`` sections. Unknown keys are
rejected rather than ignored: a silently misspelled physics constant is
worse than a hard failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .controllers import DEFAULT_PID_GAINS, PidGains
from .dynamics import QuadParams
from .env import EnvConfig
from .errors import ConfigError
from .integrator import IntegratorConfig

_QUAD_KEYS = ("Ixx", "Iyy", "Izz", "m", "g", "d", "b", "k", "w_max", "soft_rate_limits")
_INTEGRATOR_KEYS = ("rel_tol", "abs_tol", "max_internal_steps")
_PID_KEYS = ("kp", "ki", "kd", "integral_limit")
_ENV_KEYS = (
    "episode_time",
    "sim_frequency",
    "control_frequency",
    "initial_state",
    "seed",
    "constant_reference",
    "input_limit_override",
    "dynamics_kind",
    "stochastic",
    "process_noise",
    "measurement_noise",
    "noise_seeds",
    "quad_params",
    "integrator",
)
_TOP_KEYS = _ENV_KEYS + ("pid",)


@dataclass
class AppConfig:
    env: EnvConfig
    pid_gains: PidGains


def _require_mapping(value, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where} must be a mapping, got {type(value).__name__}")
    return value


def _reject_unknown(mapping: dict, allowed, where: str) -> None:
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown config key{'s' if len(unknown) > 1 else ''} in {where}: {', '.join(unknown)}")


def _pair(value, name):
    if value is None:
        return None
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{name} must be a pair, got {value!r}")
    return tuple(value)


def parse_quad_params(mapping: dict) -> QuadParams:
    mapping = _require_mapping(mapping, "quad_params")
    _reject_unknown(mapping, _QUAD_KEYS, "quad_params")
    try:
        return QuadParams(**mapping)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"quad_params: {exc}") from None


def parse_pid_gains(mapping: dict) -> PidGains:
    mapping = _require_mapping(mapping, "pid")
    _reject_unknown(mapping, _PID_KEYS, "pid")
    if not mapping:
        return DEFAULT_PID_GAINS
    merged = {
        "kp": DEFAULT_PID_GAINS.kp,
        "ki": DEFAULT_PID_GAINS.ki,
        "kd": DEFAULT_PID_GAINS.kd,
        "integral_limit": DEFAULT_PID_GAINS.integral_limit,
    }
    for key, value in mapping.items():
        if isinstance(value, (int, float)):
            value = (float(value),) * 3
        merged[key] = tuple(value)
    try:
        return PidGains(**merged)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"pid: {exc}") from None


def parse_env_config(mapping: dict, where: str = "config") -> EnvConfig:
    """Build an EnvConfig from a plain mapping, applying all defaults."""
    mapping = _require_mapping(mapping, where)
    _reject_unknown(mapping, _ENV_KEYS, where)
    kwargs = dict(mapping)
    if "quad_params" in kwargs:
        kwargs["quad_params"] = parse_quad_params(kwargs["quad_params"])
    if "integrator" in kwargs:
        sub = _require_mapping(kwargs["integrator"], "integrator")
        _reject_unknown(sub, _INTEGRATOR_KEYS, "integrator")
        sim_frequency = kwargs.get("sim_frequency", EnvConfig.sim_frequency)
        try:
            kwargs["integrator"] = IntegratorConfig(sim_frequency=sim_frequency, **sub)
        except ValueError as exc:
            raise ConfigError(f"integrator: {exc}") from None
    for key in ("process_noise", "measurement_noise", "noise_seeds"):
        if key in kwargs:
            pair = _pair(kwargs[key], key)
            if pair is None:
                kwargs.pop(key)
            else:
                kwargs[key] = pair
    for key in ("seed", "constant_reference", "input_limit_override"):
        if key in kwargs and kwargs[key] is None:
            kwargs.pop(key)
    try:
        return EnvConfig(**kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def env_config_to_dict(config: EnvConfig) -> dict:
    """Plain-type mapping for the wire protocol and for worker processes."""
    return {
        "episode_time": config.episode_time,
        "sim_frequency": config.sim_frequency,
        "control_frequency": config.control_frequency,
        "initial_state": [float(v) for v in config.initial_state],
        "seed": config.seed,
        "constant_reference": None
        if config.constant_reference is None
        else [float(v) for v in config.constant_reference],
        "input_limit_override": None
        if config.input_limit_override is None
        else [float(v) for v in config.input_limit_override],
        "dynamics_kind": config.dynamics_kind,
        "stochastic": config.stochastic,
        "process_noise": list(config.process_noise),
        "measurement_noise": list(config.measurement_noise),
        "noise_seeds": None if config.noise_seeds is None else list(config.noise_seeds),
        "quad_params": {
            "Ixx": config.quad_params.Ixx,
            "Iyy": config.quad_params.Iyy,
            "Izz": config.quad_params.Izz,
            "m": config.quad_params.m,
            "g": config.quad_params.g,
            "d": config.quad_params.d,
            "b": config.quad_params.b,
            "k": config.quad_params.k,
            "w_max": config.quad_params.w_max,
            "soft_rate_limits": list(config.quad_params.soft_rate_limits),
        },
        "integrator": {
            "rel_tol": config.integrator.rel_tol,
            "abs_tol": config.integrator.abs_tol,
            "max_internal_steps": config.integrator.max_internal_steps,
        },
    }


def load_config(path) -> AppConfig:
    """Read a YAML config file; missing keys fall back to the defaults."""
    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse {path}: {exc}") from None
    raw = _require_mapping(raw, str(path))
    _reject_unknown(raw, _TOP_KEYS, str(path))
    pid = parse_pid_gains(raw.pop("pid", {}))
    env = parse_env_config(raw, where=str(path))
    return AppConfig(env=env, pid_gains=pid)
