"""Episodic-environment conformance checker.

Validates the contract that RL training libraries rely on: well-formed
bounded spaces, reset/step signatures and return types, observations inside
their declared space, seeded reset determinism and a reachable episode end.
Raises ConformanceError on the first violation; silence means the
environment passed.
"""

from __future__ import annotations

import numpy as np

from .errors import ConformanceError
from .spaces import Box


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConformanceError(message)


def _check_space(space, name: str) -> None:
    _require(isinstance(space, Box), f"{name} must be a Box space, got {type(space).__name__}")
    _require(len(space.shape) == 1, f"{name} must be a flat vector space")
    _require(bool(np.all(np.isfinite(space.low))), f"{name} lower bounds must be finite")
    _require(bool(np.all(np.isfinite(space.high))), f"{name} upper bounds must be finite")
    sample = space.sample()
    _require(space.contains(sample), f"{name}.sample() fell outside the space")


def _check_observation(space, observation, where: str) -> None:
    _require(isinstance(observation, np.ndarray), f"{where} must return an ndarray observation")
    _require(
        observation.shape == space.shape,
        f"{where} observation shape {observation.shape} does not match space {space.shape}",
    )
    _require(space.contains(observation), f"{where} observation left the declared space: {observation}")


def check_env(env, max_episode_steps: int = 100_000, seed: int = 0) -> None:
    """Run the full conformance sweep against one environment instance."""
    _require(hasattr(env, "observation_space"), "environment lacks observation_space")
    _require(hasattr(env, "action_space"), "environment lacks action_space")
    _check_space(env.observation_space, "observation_space")
    _check_space(env.action_space, "action_space")
    _require(isinstance(getattr(env, "metadata", None), dict), "environment lacks a metadata dict")

    obs = env.reset(seed=seed)
    _check_observation(env.observation_space, obs, "reset()")
    repeat = env.reset(seed=seed)
    _require(
        np.array_equal(obs, repeat),
        "reset(seed) is not deterministic: two seeded resets returned different observations",
    )

    env.action_space.seed(seed)
    done = False
    steps = 0
    while not done:
        _require(steps < max_episode_steps, f"episode did not finish within {max_episode_steps} steps")
        result = env.step(env.action_space.sample())
        _require(
            isinstance(result, tuple) and len(result) == 4,
            "step() must return (observation, reward, done, info)",
        )
        obs, reward, done, info = result
        _check_observation(env.observation_space, obs, "step()")
        _require(isinstance(reward, float), f"reward must be a float, got {type(reward).__name__}")
        _require(isinstance(done, bool), f"done must be a bool, got {type(done).__name__}")
        _require(isinstance(info, dict), f"info must be a dict, got {type(info).__name__}")
        steps += 1

    # a finished episode must be recoverable through reset
    obs = env.reset()
    _check_observation(env.observation_space, obs, "reset() after done")
