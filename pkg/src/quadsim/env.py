"""Episodic attitude-tracking environment.

An episode tracks a constant attitude reference. Observations are the
6-dimensional error vector reference - state with angle errors wrapped to
[-pi, pi) and observed rates clipped to the soft limits. The reward is the
negative quadratic tracking cost, computed from the true (noise-free) error
and the torque actually realized by the motors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, NamedTuple

import numpy as np

from .dynamics import (
    ANGLE_IDX,
    RATE_IDX,
    InputLimits,
    QuadParams,
    StateLimits,
    build_linear_model,
    compute_hard_state_limits,
    compute_input_limits,
    linear_deriv,
    mix_torques_to_motors,
    nonlinear_deriv,
    soft_state_limits,
)
from .errors import ConfigError, EpisodeDoneError
from .integrator import IntegratorConfig, integrate_interval

_TWO_PI = 2.0 * math.pi

DYNAMICS_KINDS = ("linear", "nonlinear")


def wrap_angle(a):
    """Map an angle (scalar or array) into the half-open interval [-pi, pi)."""
    return a - _TWO_PI * np.floor((a + math.pi) / _TWO_PI)


@dataclass(frozen=True, eq=False)
class CostWeights:
    """Diagonal quadratic cost matrices for state error and input."""

    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        for name, mat in (("Q", self.Q), ("R", self.R)):
            if not np.array_equal(mat, np.diag(np.diag(mat))):
                raise ValueError(f"CostWeights.{name} must be diagonal")
            if np.any(np.diag(mat) < 0.0):
                raise ValueError(f"CostWeights.{name} diagonal must be nonnegative")


def compute_reward(x_err: np.ndarray, u: np.ndarray, w: CostWeights) -> float:
    """reward = -(x_err' Q x_err + u' R u), always <= 0."""
    return -float(x_err @ w.Q @ x_err + u @ w.R @ u)


def sample_reference(rng: np.random.Generator) -> np.ndarray:
    """Constant attitude reference: angles uniform in [-pi, pi), rates zero."""
    ref = np.zeros(6)
    ref[ANGLE_IDX] = rng.uniform(-math.pi, math.pi, size=3)
    return ref


def _as_vector(value, n, name) -> np.ndarray:
    vec = np.array(value, dtype=float)
    if vec.shape != (n,):
        raise ConfigError(f"{name} must be a {n}-vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise ConfigError(f"{name} must be finite")
    return vec


@dataclass(eq=False)
class EnvConfig:
    """Environment parameters; defaults reproduce the standard setup."""

    episode_time: float = 5.0
    sim_frequency: float = 250.0
    control_frequency: float = 50.0
    initial_state: Any = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    seed: int | None = None
    constant_reference: Any = None
    input_limit_override: Any = None
    dynamics_kind: str = "nonlinear"
    stochastic: bool = False
    process_noise: tuple[float, float] = (0.0, 0.01)
    measurement_noise: tuple[float, float] = (0.0, 0.01)
    noise_seeds: tuple[int, int] | None = None
    quad_params: QuadParams = field(default_factory=QuadParams)
    integrator: IntegratorConfig | None = None

    def __post_init__(self):
        if not (math.isfinite(self.episode_time) and self.episode_time > 0.0):
            raise ConfigError(f"episode_time must be positive, got {self.episode_time!r}")
        if not self.sim_frequency > 0.0 or not self.control_frequency > 0.0:
            raise ConfigError("sim_frequency and control_frequency must be positive")
        ratio = self.sim_frequency / self.control_frequency
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError(
                f"sim_frequency ({self.sim_frequency}) must be an integer multiple of "
                f"control_frequency ({self.control_frequency})"
            )
        n_steps = self.episode_time * self.control_frequency
        if abs(n_steps - round(n_steps)) > 1e-9 or round(n_steps) < 1:
            raise ConfigError(
                f"episode_time ({self.episode_time}) must span a whole number of control steps"
            )
        self.initial_state = _as_vector(self.initial_state, 6, "initial_state")
        if self.constant_reference is not None:
            self.constant_reference = _as_vector(self.constant_reference, 6, "constant_reference")
        if self.input_limit_override is not None:
            self.input_limit_override = _as_vector(self.input_limit_override, 3, "input_limit_override")
            if np.any(self.input_limit_override <= 0.0):
                raise ConfigError("input_limit_override components must be positive")
        if self.dynamics_kind not in DYNAMICS_KINDS:
            raise ConfigError(f"dynamics_kind must be one of {DYNAMICS_KINDS}, got {self.dynamics_kind!r}")
        for name in ("process_noise", "measurement_noise"):
            mean, var = getattr(self, name)
            if not (math.isfinite(mean) and math.isfinite(var) and var >= 0.0):
                raise ConfigError(f"{name} must be (finite mean, variance >= 0), got {getattr(self, name)!r}")
            setattr(self, name, (float(mean), float(var)))
        if self.noise_seeds is not None:
            w_seed, v_seed = self.noise_seeds
            self.noise_seeds = (int(w_seed), int(v_seed))
        if self.integrator is None:
            self.integrator = IntegratorConfig(sim_frequency=self.sim_frequency)
        elif self.integrator.sim_frequency != self.sim_frequency:
            raise ConfigError(
                "integrator.sim_frequency must match the environment sim_frequency"
            )


class StepResult(NamedTuple):
    observation: np.ndarray
    reward: float
    done: bool
    info: dict


class Environment:
    """Single episodic environment instance. Not thread-safe; one per thread."""

    def __init__(self, config: EnvConfig):
        self.config = replace(config)
        p = config.quad_params
        self.params = p

        if config.input_limit_override is not None:
            u_max = config.input_limit_override.copy()
            self.input_limits = InputLimits(U_max=u_max, U_min=-u_max)
        else:
            self.input_limits = compute_input_limits(p)
        try:
            self.state_limits = StateLimits(
                hard=compute_hard_state_limits(p, 0.0, config.episode_time),
                soft=soft_state_limits(p),
            )
        except ValueError as exc:
            raise ConfigError(f"episode_time: {exc}") from None
        self.cost = CostWeights(
            Q=np.diag(1.0 / self.state_limits.soft),
            R=np.diag(1.0 / self.input_limits.U_max),
        )

        self.n_steps = int(round(config.episode_time * config.control_frequency))
        self.n_substeps = int(round(config.sim_frequency / config.control_frequency))
        self.dt_sub = 1.0 / config.sim_frequency
        self.dt_control = 1.0 / config.control_frequency

        if config.dynamics_kind == "linear":
            model = build_linear_model(p)
            self._deriv = lambda x, u: linear_deriv(x, u, model)
        else:
            self._deriv = lambda x, u: nonlinear_deriv(x, u, p)

        self._hover_thrust = p.m * p.g
        self._soft_rates = self.state_limits.soft[RATE_IDX]

        self.state = config.initial_state.copy()
        self.state[ANGLE_IDX] = wrap_angle(self.state[ANGLE_IDX])
        self.reference = np.zeros(6)
        self._step_count = 0
        self._needs_reset = True
        self._done = False
        self.seed(config.seed, noise_seeds=config.noise_seeds)

    def seed(self, seed: int | None, noise_seeds: tuple[int, int] | None = None) -> None:
        """Reseed the reference and noise streams from one master seed.

        With ``noise_seeds`` set, the process and measurement streams are
        pinned to those values instead of being derived from ``seed``.
        """
        root = np.random.SeedSequence(seed)
        ref_ss, proc_ss, meas_ss = root.spawn(3)
        self._ref_rng = np.random.Generator(np.random.PCG64(ref_ss))
        if noise_seeds is not None:
            proc_ss = np.random.SeedSequence(noise_seeds[0])
            meas_ss = np.random.SeedSequence(noise_seeds[1])
        self._proc_rng = np.random.Generator(np.random.PCG64(proc_ss))
        self._meas_rng = np.random.Generator(np.random.PCG64(meas_ss))

    def reset(self) -> np.ndarray:
        """Start a new episode; the plant state persists unless it left the soft box."""
        if self.config.constant_reference is not None:
            self.reference = self.config.constant_reference.copy()
            self.reference[ANGLE_IDX] = wrap_angle(self.reference[ANGLE_IDX])
        else:
            self.reference = sample_reference(self._ref_rng)
        if np.any(np.abs(self.state) > self.state_limits.soft):
            self.state = self.config.initial_state.copy()
            self.state[ANGLE_IDX] = wrap_angle(self.state[ANGLE_IDX])
        self._step_count = 0
        self._needs_reset = False
        self._done = False
        return self._observe(self._true_error())

    def step(self, action) -> StepResult:
        """Advance one control period (zero-order hold over the solver substeps)."""
        if self._needs_reset:
            raise EpisodeDoneError("environment not ready: call reset()")
        if self._done:
            raise EpisodeDoneError("episode finished: call reset() to start a new one")
        a = np.asarray(action, dtype=float)
        if a.shape != (3,):
            raise ValueError(f"action must be a 3-vector, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("action must be finite")

        a_clamped = np.clip(a, self.input_limits.U_min, self.input_limits.U_max)
        motor_speeds, u_real = mix_torques_to_motors(a_clamped, self._hover_thrust, self.params)

        x = integrate_interval(
            self._deriv, self.state, u_real, self.n_substeps, self.dt_sub, self.config.integrator
        )
        if self.config.stochastic:
            mean, var = self.config.process_noise
            x = x + self._proc_rng.normal(mean, math.sqrt(var), size=6)
        x[ANGLE_IDX] = wrap_angle(x[ANGLE_IDX])
        self.state = x

        err_true = self._true_error()
        obs = err_true.copy()
        if self.config.stochastic:
            mean, var = self.config.measurement_noise
            obs += self._meas_rng.normal(mean, math.sqrt(var), size=6)
        obs = self._observe(obs)

        reward = compute_reward(err_true, u_real, self.cost)
        self._step_count += 1
        t = self._step_count / self.config.control_frequency
        self._done = self._step_count >= self.n_steps
        info = {
            "state": self.state.copy(),
            "reference": self.reference.copy(),
            "action_clamped": a_clamped,
            "realized_torque": u_real,
            "motor_speeds": motor_speeds,
            "t": t,
        }
        return StepResult(observation=obs, reward=reward, done=self._done, info=info)

    def _true_error(self) -> np.ndarray:
        err = self.reference - self.state
        err[ANGLE_IDX] = wrap_angle(err[ANGLE_IDX])
        return err

    def _observe(self, err: np.ndarray) -> np.ndarray:
        obs = err.copy()
        obs[ANGLE_IDX] = wrap_angle(obs[ANGLE_IDX])
        obs[RATE_IDX] = np.clip(obs[RATE_IDX], -self._soft_rates, self._soft_rates)
        return obs
