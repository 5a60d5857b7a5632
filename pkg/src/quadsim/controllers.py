"""Baseline controllers sharing one interface: act(observation, dt) -> torque."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ANGLE_IDX, RATE_IDX, InputLimits

CONTROLLER_KINDS = ("pid", "zero", "random")


@dataclass(frozen=True)
class PidGains:
    """Per-axis parallel-form PID gains.

    The derivative term feeds on the observed rate error directly, so there
    is no numeric differentiation. ``integral_limit`` clamps the stored error
    integral per axis before it is scaled by ki (anti-windup).
    """

    kp: tuple[float, float, float]
    ki: tuple[float, float, float]
    kd: tuple[float, float, float]
    integral_limit: tuple[float, float, float] = (0.5, 0.5, 0.5)

    def __post_init__(self):
        for name in ("kp", "ki", "kd", "integral_limit"):
            vec = tuple(float(v) for v in getattr(self, name))
            if len(vec) != 3 or not all(np.isfinite(vec)):
                raise ValueError(f"PidGains.{name} must be 3 finite values")
            object.__setattr__(self, name, vec)
        if any(v <= 0.0 for v in self.integral_limit):
            raise ValueError("PidGains.integral_limit must be positive")


# Coarse manual tune against the default nonlinear plant: near-critically
# damped response on each axis, no claim of optimality.
DEFAULT_PID_GAINS = PidGains(
    kp=(0.9, 0.9, 0.25),
    ki=(0.02, 0.02, 0.01),
    kd=(0.25, 0.26, 0.15),
    integral_limit=(0.5, 0.5, 0.5),
)


def _check_observation(observation) -> np.ndarray:
    obs = np.asarray(observation, dtype=float)
    if obs.shape != (6,):
        raise ValueError(f"observation must be a 6-vector, got shape {obs.shape}")
    if not np.all(np.isfinite(obs)):
        raise ValueError("observation must be finite")
    return obs


class PidController:
    """Parallel PID on the error observation, output clamped to the torque box."""

    def __init__(self, limits: InputLimits, gains: PidGains = DEFAULT_PID_GAINS):
        self.limits = limits
        self.gains = gains
        self._integral = np.zeros(3)

    def act(self, observation, dt: float) -> np.ndarray:
        obs = _check_observation(observation)
        angle_err = obs[ANGLE_IDX]
        rate_err = obs[RATE_IDX]
        self._integral += angle_err * dt
        np.clip(self._integral, -np.asarray(self.gains.integral_limit), np.asarray(self.gains.integral_limit), out=self._integral)
        u = (
            np.asarray(self.gains.kp) * angle_err
            + np.asarray(self.gains.ki) * self._integral
            + np.asarray(self.gains.kd) * rate_err
        )
        return np.clip(u, self.limits.U_min, self.limits.U_max)

    def reset(self) -> None:
        self._integral[:] = 0.0


class ZeroController:
    """Always outputs zero torque."""

    def act(self, observation, dt: float) -> np.ndarray:
        _check_observation(observation)
        return np.zeros(3)

    def reset(self) -> None:
        pass


class RandomController:
    """Uniform random torques inside the input box, from a seeded stream.

    reset() intentionally leaves the stream alone so consecutive episodes
    keep drawing fresh actions.
    """

    def __init__(self, limits: InputLimits, seed: int | None = None):
        self.limits = limits
        self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))

    def act(self, observation, dt: float) -> np.ndarray:
        _check_observation(observation)
        return self._rng.uniform(self.limits.U_min, self.limits.U_max)

    def reset(self) -> None:
        pass


def make_controller(
    kind: str,
    limits: InputLimits,
    gains: PidGains | None = None,
    seed: int | None = None,
):
    """Build a controller by name: 'pid', 'zero' or 'random'."""
    if kind == "pid":
        return PidController(limits, gains or DEFAULT_PID_GAINS)
    if kind == "zero":
        return ZeroController()
    if kind == "random":
        return RandomController(limits, seed=seed)
    raise ValueError(f"unknown controller kind {kind!r}; expected one of {CONTROLLER_KINDS}")
