"""Episode running, controller comparison and parallel batches."""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .controllers import PidGains, make_controller
from .dynamics import compute_hard_state_limits, compute_input_limits, soft_state_limits
from .env import EnvConfig, Environment
from .errors import BatchError
from .metrics import MetricsTable, Trajectory, compute_metrics, metrics_table

AXIS_TO_STATE_INDEX = {"roll": 0, "pitch": 2, "yaw": 4}


def run_episode(env: Environment, controller) -> Trajectory:
    """Run one full episode and log it at the control rate."""
    start = time.perf_counter()
    obs = env.reset()
    controller.reset()
    n = env.n_steps
    t = np.empty(n)
    states = np.empty((n, 6))
    observations = np.empty((n, 6))
    torques = np.empty((n, 3))
    rewards = np.empty(n)
    for i in range(n):
        action = controller.act(obs, env.dt_control)
        obs, reward, done, info = env.step(action)
        t[i] = info["t"]
        states[i] = info["state"]
        observations[i] = obs
        torques[i] = info["realized_torque"]
        rewards[i] = reward
    assert done
    wall = time.perf_counter() - start
    return Trajectory(t=t, states=states, observations=observations, torques=torques, rewards=rewards, wall_time=wall)


def run_and_save_episode(
    env_config: EnvConfig,
    controller_spec: str,
    out_dir,
    pid_gains: PidGains | None = None,
    axis: str = "roll",
    controller_seed: int | None = None,
) -> dict:
    """Run one episode, write trajectory.csv and metrics.json, return a summary."""
    env = Environment(env_config)
    controller = make_controller(controller_spec, env.input_limits, gains=pid_gains, seed=controller_seed)
    traj = run_episode(env, controller)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    traj_path = out / "trajectory.csv"
    traj.to_csv(traj_path)

    step_ref = float(env.reference[AXIS_TO_STATE_INDEX[axis]])
    record = {
        "controller": controller_spec,
        "axis": axis,
        "step_ref": step_ref,
        "total_reward": float(np.sum(traj.rewards)),
        "computation_time": traj.wall_time,
        "metrics": None,
    }
    if step_ref != 0.0:
        record["metrics"] = compute_metrics(traj, axis, step_ref).as_dict()
    metrics_path = out / "metrics.json"
    metrics_path.write_text(json.dumps(record, indent=2) + "\n")
    return {"trajectory": str(traj_path), "metrics": str(metrics_path), "record": record}


@dataclass
class ComparisonResult:
    table: MetricsTable
    trajectories: dict
    files: dict


def compare(
    env_config: EnvConfig,
    controller_specs,
    axis: str = "roll",
    step_amplitude: float = 1.0,
    out_dir=None,
    pid_gains: PidGains | None = None,
) -> ComparisonResult:
    """Run several controllers on the identical seeded step-reference episode.

    The reference is a constant step of ``step_amplitude`` on the chosen axis.
    Every controller sees the same environment configuration and seed, so in
    stochastic mode the noise realizations match across controllers.
    """
    reference = np.zeros(6)
    reference[AXIS_TO_STATE_INDEX[axis]] = step_amplitude
    step_config = replace(env_config, constant_reference=reference)

    rows = []
    trajectories = {}
    files = {"trajectories": {}, "plots": {}}
    out = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)

    for spec in controller_specs:
        env = Environment(step_config)
        controller = make_controller(spec, env.input_limits, gains=pid_gains, seed=env_config.seed)
        traj = run_episode(env, controller)
        trajectories[spec] = traj
        rows.append((spec, compute_metrics(traj, axis, step_amplitude)))
        if out is not None:
            path = out / f"trajectory_{spec}.csv"
            traj.to_csv(path)
            files["trajectories"][spec] = str(path)

    table = metrics_table(rows)
    if out is not None:
        table_csv = out / "metrics_table.csv"
        table_json = out / "metrics_table.json"
        table.to_csv(table_csv)
        table.to_json(table_json)
        files["table_csv"] = str(table_csv)
        files["table_json"] = str(table_json)
        files["plots"] = _write_plot_data(out, axis, controller_specs, trajectories)
    return ComparisonResult(table=table, trajectories=trajectories, files=files)


def _write_plot_data(out: Path, axis: str, specs, trajectories) -> dict:
    """Time vs angle and time vs rate of the stepped axis, one column per controller."""
    idx = AXIS_TO_STATE_INDEX[axis]
    written = {}
    for name, col in ((f"{axis}_angle", idx), (f"{axis}_rate", idx + 1)):
        path = out / f"plot_{name}.csv"
        first = trajectories[specs[0]]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", *specs])
            for i in range(len(first)):
                writer.writerow(
                    [repr(float(first.t[i]))] + [repr(float(trajectories[s].states[i, col])) for s in specs]
                )
        written[name] = str(path)
    return written


def _episode_seeds(master_seed: int | None, n: int) -> list[tuple[int, int]]:
    """Deterministic (env_seed, controller_seed) pairs derived from one master seed."""
    words = np.random.SeedSequence(master_seed).generate_state(2 * n, dtype=np.uint32)
    return [(int(words[2 * i]), int(words[2 * i + 1])) for i in range(n)]


def _run_batch_env(args) -> dict:
    """Worker body: run all episodes of one environment index."""
    (index, config, controller_spec, pid_gains, episodes, env_seed, ctrl_seed) = args
    try:
        env_config = replace(config, seed=env_seed)
        env = Environment(env_config)
        controller = make_controller(controller_spec, env.input_limits, gains=pid_gains, seed=ctrl_seed)
        start = time.perf_counter()
        rewards = []
        for _ in range(episodes):
            obs = env.reset()
            controller.reset()
            total = 0.0
            done = False
            while not done:
                obs, reward, done, _ = env.step(controller.act(obs, env.dt_control))
                total += reward
            rewards.append(total)
        wall = time.perf_counter() - start
    except Exception as exc:
        raise BatchError(f"env index {index} (seed {env_seed}) failed: {exc}") from exc
    return {
        "index": index,
        "seed": env_seed,
        "episode_rewards": rewards,
        "wall_time": wall,
        "steps": episodes * env.n_steps,
    }


def batch(
    env_config: EnvConfig,
    n_envs: int,
    episodes_per_env: int = 1,
    workers: int = 1,
    controller_spec: str = "pid",
    pid_gains: PidGains | None = None,
    master_seed: int | None = 0,
) -> dict:
    """Run independent environments across a worker pool.

    Seeds are derived deterministically from the master seed per environment
    index and results are gathered by index, so the per-episode reward list
    does not depend on the worker count.
    """
    if n_envs < 1:
        raise ValueError("n_envs must be at least 1")
    if episodes_per_env < 1:
        raise ValueError("episodes_per_env must be at least 1")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    seeds = _episode_seeds(master_seed, n_envs)
    tasks = [
        (i, env_config, controller_spec, pid_gains, episodes_per_env, seeds[i][0], seeds[i][1])
        for i in range(n_envs)
    ]
    start = time.perf_counter()
    try:
        if workers == 1:
            results = [_run_batch_env(task) for task in tasks]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_run_batch_env, tasks))
    except BatchError:
        raise
    except Exception as exc:
        raise BatchError(f"batch worker failed: {exc}") from exc
    wall = time.perf_counter() - start

    results.sort(key=lambda r: r["index"])
    episode_rewards = [r for res in results for r in res["episode_rewards"]]
    total_steps = sum(r["steps"] for r in results)
    return {
        "n_envs": n_envs,
        "episodes_per_env": episodes_per_env,
        "workers": workers,
        "master_seed": master_seed,
        "controller": controller_spec,
        "env_seeds": [s for s, _ in seeds],
        "episode_rewards": episode_rewards,
        "per_env_wall_time": [r["wall_time"] for r in results],
        "wall_time": wall,
        "total_steps": total_steps,
        "steps_per_second": total_steps / wall if wall > 0 else float("inf"),
    }


def limits_report(env_config: EnvConfig) -> str:
    """Human-readable derived limits for pre-flight sanity checks."""
    p = env_config.quad_params
    input_limits = compute_input_limits(p)
    hard = compute_hard_state_limits(p, 0.0, env_config.episode_time)
    soft = soft_state_limits(p)
    lines = [
        f"w_min:  {p.w_min:.4f} rad/s",
        f"w_max:  {p.w_max:.4f} rad/s",
        f"U_max:  [{', '.join(f'{v:.6g}' for v in input_limits.U_max)}] N*m",
        f"U_min:  [{', '.join(f'{v:.6g}' for v in input_limits.U_min)}] N*m",
        f"hard state limits: [{', '.join(f'{v:.6g}' for v in hard)}]",
        f"soft state limits: [{', '.join(f'{v:.6g}' for v in soft)}]",
        f"episode: {env_config.episode_time} s at {env_config.control_frequency} Hz control, "
        f"{env_config.sim_frequency} Hz simulation",
    ]
    return "\n".join(lines)
