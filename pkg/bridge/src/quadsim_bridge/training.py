"""Small policy-gradient trainer used by the integration smoke test.

REINFORCE on a linear Gaussian policy with a fixed exploration scale and a
per-timestep batch baseline. The point is not sample efficiency: it shows an
agent training against the remote environment end to end and measurably
improving within roughly ten thousand steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch


def smoke_config() -> dict:
    """Environment settings that make the short training run well posed.

    Tracking a fixed half-radian roll reference with reduced torque limits, a
    10 Hz controller and tight soft rate limits. The tight limits matter: the
    reset rule rescues the plant to the initial state whenever exploration
    noise has pumped the rates, so episodes stay comparable during learning.
    """
    return {
        "constant_reference": [0.5, 0, 0, 0, 0, 0],
        "control_frequency": 10.0,
        "sim_frequency": 250.0,
        "input_limit_override": [0.3, 0.3, 0.1],
        "quad_params": {"soft_rate_limits": [1.0, 1.0, 1.0]},
    }


@dataclass
class TrainingResult:
    episode_returns: list[float] = field(default_factory=list)
    total_steps: int = 0

    def mean_return(self, first: int | None = None, last: int | None = None) -> float:
        if first is not None:
            window = self.episode_returns[:first]
        elif last is not None:
            window = self.episode_returns[-last:]
        else:
            window = self.episode_returns
        return float(np.mean(window))


class LinearGaussianPolicy(torch.nn.Module):
    """action = clip(N(W s + b, sigma), -1, 1) scaled to the torque box."""

    def __init__(self, obs_dim: int, act_dim: int, sigma: float):
        super().__init__()
        self.mean = torch.nn.Linear(obs_dim, act_dim)
        torch.nn.init.zeros_(self.mean.weight)
        torch.nn.init.zeros_(self.mean.bias)
        self.sigma = torch.full((act_dim,), float(sigma))

    def distribution(self, obs: torch.Tensor) -> torch.distributions.Normal:
        return torch.distributions.Normal(self.mean(obs), self.sigma)


def train_reinforce(
    env,
    total_steps: int = 10_000,
    seed: int = 0,
    lr: float = 0.01,
    gamma: float = 0.99,
    sigma: float = 0.1,
    episodes_per_update: int = 5,
) -> TrainingResult:
    """Train until ``total_steps`` environment steps have been consumed."""
    torch.manual_seed(seed)
    policy = LinearGaussianPolicy(env.observation_space.shape[0], env.action_space.shape[0], sigma)
    optimizer = torch.optim.Adam(policy.mean.parameters(), lr=lr)
    act_scale = torch.as_tensor(env.action_space.high, dtype=torch.float32)
    obs_scale = torch.as_tensor(env.observation_space.high, dtype=torch.float32)

    result = TrainingResult()
    env.seed(seed)
    batch_logprobs: list[torch.Tensor] = []
    batch_returns: list[torch.Tensor] = []

    while result.total_steps < total_steps:
        obs = env.reset()
        done = False
        logprobs = []
        rewards = []
        while not done:
            obs_t = torch.as_tensor(obs, dtype=torch.float32) / obs_scale
            dist = policy.distribution(obs_t)
            raw = dist.sample()
            logprobs.append(dist.log_prob(raw).sum())
            action = torch.clamp(raw, -1.0, 1.0) * act_scale
            obs, reward, done, _ = env.step(action.numpy())
            rewards.append(reward)
            result.total_steps += 1
        result.episode_returns.append(float(np.sum(rewards)))

        returns = np.zeros(len(rewards))
        acc = 0.0
        for i in reversed(range(len(rewards))):
            acc = rewards[i] + gamma * acc
            returns[i] = acc
        batch_logprobs.append(torch.stack(logprobs))
        batch_returns.append(torch.as_tensor(returns, dtype=torch.float32))

        if len(batch_returns) >= episodes_per_update:
            returns_matrix = torch.stack(batch_returns)  # fixed-horizon episodes
            advantage = returns_matrix - returns_matrix.mean(dim=0, keepdim=True)
            spread = advantage.std()
            if spread > 1e-8:
                advantage = advantage / spread
            loss = -(torch.stack(batch_logprobs) * advantage).mean()
            optimizer.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(policy.mean.parameters(), 1.0)
            optimizer.step()
            batch_logprobs, batch_returns = [], []

    return result
