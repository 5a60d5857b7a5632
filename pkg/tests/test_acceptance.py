"""End-to-end acceptance checks, one test per shipped guarantee.

Every test pins its tolerance inline and prints one line on success so a
verbose run reads as a checklist:

    python3 -m pytest tests/test_acceptance.py -v -s
"""

import json
import math
import socket
import threading
import time

import numpy as np
import pytest

from quadsim.cli import main as cli_main
from quadsim.controllers import DEFAULT_PID_GAINS, PidController
from quadsim.dynamics import (
    QuadParams,
    build_linear_model,
    compute_input_limits,
    linear_deriv,
    mix_torques_to_motors,
    motors_to_torques,
    nonlinear_deriv,
)
from quadsim.env import EnvConfig, Environment
from quadsim.harness import run_episode
from quadsim.integrator import IntegratorConfig, integrate_grid
from quadsim.metrics import METRIC_ROWS, compute_metrics
from quadsim.server import serve_tcp

P = QuadParams()
DT = 1.0 / 250.0
CFG = IntegratorConfig()


def _ok(name: str, started: float, detail: str = "") -> None:
    elapsed = time.perf_counter() - started
    suffix = f" ({detail})" if detail else ""
    print(f"[PASS] {name}{suffix} [{elapsed:.2f}s]")


def test_limit_derivation():
    started = time.perf_counter()
    assert P.w_min == pytest.approx(323.9, abs=0.1)
    u_max = compute_input_limits(P).U_max
    np.testing.assert_allclose(u_max, [1.2568, 1.2568, 0.21449], atol=1e-3)
    _ok("limit derivation", started, f"w_min={P.w_min:.4f}")


def test_integrator_closed_form_double_integrator():
    started = time.perf_counter()
    model = build_linear_model(P)
    derivs = {
        "nonlinear": lambda x, u: nonlinear_deriv(x, u, P),
        "linear": lambda x, u: linear_deriv(x, u, model),
    }
    worst = 0.0
    t = np.arange(1251) * DT
    inertia = [P.Ixx, P.Iyy, P.Izz]
    for kind, deriv in derivs.items():
        for axis in range(3):
            u = np.zeros(3)
            u[axis] = 0.8 * compute_input_limits(P).U_max[axis]
            grid = integrate_grid(deriv, np.zeros(6), u, 1250, DT, CFG)
            angle = u[axis] / (2 * inertia[axis]) * t**2
            rate = u[axis] / inertia[axis] * t
            err = max(
                np.abs(grid[:, 2 * axis] - angle).max(),
                np.abs(grid[:, 2 * axis + 1] - rate).max(),
            )
            worst = max(worst, err)
            assert err < 1e-8, f"{kind} axis {axis}: {err:.3e}"
    _ok("integrator closed-form oracle", started, f"max err {worst:.2e}")


def test_conservation_under_free_tumbling():
    started = time.perf_counter()
    rng = np.random.default_rng(2024)
    deriv = lambda x, u: nonlinear_deriv(x, u, P)
    I = P.inertia
    worst_e = worst_l = 0.0
    for _ in range(100):
        x0 = np.zeros(6)
        x0[[1, 3, 5]] = rng.uniform(-10.0, 10.0, 3)
        grid = integrate_grid(deriv, x0, np.zeros(3), 1250, DT, CFG)
        rates = grid[:, [1, 3, 5]]
        E = 0.5 * (rates**2 @ I)
        L2 = rates**2 @ I**2
        worst_e = max(worst_e, np.abs(E / E[0] - 1.0).max())
        worst_l = max(worst_l, np.abs(L2 / L2[0] - 1.0).max())
    assert worst_e < 1e-6
    assert worst_l < 1e-6
    _ok("energy and momentum conservation", started, f"drift E {worst_e:.2e}, L2 {worst_l:.2e}")


def test_linearization_agreement_at_small_rates():
    started = time.perf_counter()
    model = build_linear_model(P)
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(1000):
        x = np.empty(6)
        x[[0, 2, 4]] = rng.uniform(-math.pi, math.pi, 3)
        x[[1, 3, 5]] = rng.uniform(-0.01, 0.01, 3)
        u = rng.uniform(compute_input_limits(P).U_min, compute_input_limits(P).U_max)
        worst = max(worst, np.abs(nonlinear_deriv(x, u, P) - linear_deriv(x, u, model)).max())
    assert worst < 1e-4
    _ok("linear/nonlinear derivative agreement", started, f"max diff {worst:.2e}")


def test_mixing_round_trip_on_grid():
    started = time.perf_counter()
    hover = P.m * P.g
    limits = compute_input_limits(P)

    def feasible_squares(u):
        base = hover / (4 * P.b)
        return np.array(
            [
                base + u[1] / (2 * P.d * P.b) + u[2] / (4 * P.k),
                base - u[0] / (2 * P.d * P.b) - u[2] / (4 * P.k),
                base - u[1] / (2 * P.d * P.b) + u[2] / (4 * P.k),
                base + u[0] / (2 * P.d * P.b) - u[2] / (4 * P.k),
            ]
        )

    axes = [np.linspace(lo, hi, 10) for lo, hi in zip(limits.U_min, limits.U_max)]
    worst = 0.0
    feasible = saturated = 0
    for u1 in axes[0]:
        for u2 in axes[1]:
            for u3 in axes[2]:
                u = np.array([u1, u2, u3])
                squares = feasible_squares(u)
                w, realized = mix_torques_to_motors(u, hover, P)
                if np.all(squares >= 0.0) and np.all(squares <= P.w_max**2):
                    feasible += 1
                    worst = max(worst, np.abs(realized - u).max())
                else:
                    saturated += 1
                    # infeasible corner: clamping reported via realized torque
                    assert np.abs(realized - u).max() > 1e-9
                    np.testing.assert_allclose(realized, motors_to_torques(w, P), atol=1e-15)
    assert worst < 1e-9
    assert feasible >= 0.75 * 1000  # the box is mostly reachable at hover thrust

    w, realized = mix_torques_to_motors(np.zeros(3), hover, P)
    np.testing.assert_allclose(w, P.w_min, rtol=1e-12)
    np.testing.assert_allclose(realized, 0.0, atol=1e-12)
    _ok(
        "motor mixing round trip",
        started,
        f"max err {worst:.1e} on {feasible} feasible pts, {saturated} clamped corners",
    )


def test_environment_contract():
    started = time.perf_counter()
    rng = np.random.default_rng(7)
    actions = rng.uniform(-1.0, 1.0, size=(250, 3)) * [1.2, 1.2, 0.2]

    def run(stochastic):
        env = Environment(EnvConfig(seed=11, stochastic=stochastic))
        observations = [env.reset()]
        rewards = []
        dones = []
        for a in actions:
            obs, reward, done, _ = env.step(a)
            observations.append(obs)
            rewards.append(reward)
            dones.append(done)
        return np.array(observations), np.array(rewards), dones

    for stochastic in (False, True):
        obs_a, rew_a, dones = run(stochastic)
        obs_b, rew_b, _ = run(stochastic)
        assert len(dones) == 250
        assert dones[-1] and not any(dones[:-1])
        assert np.all(rew_a <= 0.0)
        angles = obs_a[:, [0, 2, 4]]
        assert np.all(angles >= -math.pi) and np.all(angles < math.pi)
        assert np.array_equal(obs_a, obs_b) and np.array_equal(rew_a, rew_b)
    _ok("environment episode contract", started, "250 steps, reward<=0, bit-exact reruns")


def test_noise_statistics():
    started = time.perf_counter()
    env = Environment(EnvConfig(seed=31415, stochastic=True))
    mean, var = env.config.process_noise
    draws = env._proc_rng.normal(mean, math.sqrt(var), size=100_000)
    m, v = float(draws.mean()), float(draws.var())
    assert abs(m - 0.0) < 0.003
    assert abs(v - 0.01) < 0.05 * 0.01
    _ok("process noise statistics", started, f"mean {m:+.4f}, var {v:.5f}")


def test_metrics_oracles():
    started = time.perf_counter()
    from quadsim.metrics import Trajectory

    def traj_from(t, y):
        n = len(t)
        states = np.zeros((n, 6))
        states[:, 0] = y
        return Trajectory(t=t, states=states, torques=np.zeros((n, 3)), rewards=np.zeros(n))

    t = np.arange(1, 1001) * 0.02
    m = compute_metrics(traj_from(t, 1.0 - np.exp(-t)), "roll", 1.0)
    assert m.rise_time == pytest.approx(2.197, abs=0.02)
    assert m.settling_time == pytest.approx(3.912, abs=0.02)
    assert m.overshoot_pct == 0.0

    t2 = np.arange(1, 501) * 0.02
    for zeta, wn in ((0.25, 5.0), (0.6, 3.5)):
        wd = wn * math.sqrt(1 - zeta**2)
        y = 1.0 - np.exp(-zeta * wn * t2) * (np.cos(wd * t2) + zeta * wn / wd * np.sin(wd * t2))
        m2 = compute_metrics(traj_from(t2, y), "roll", 1.0)
        assert m2.overshoot_pct == pytest.approx(100 * math.exp(-zeta * math.pi / math.sqrt(1 - zeta**2)), abs=0.5)
        assert m2.peak_time == pytest.approx(math.pi / wd, abs=0.02)
    _ok("step-response metric oracles", started)


def test_pid_closed_loop_and_comparison_table(tmp_path):
    started = time.perf_counter()
    env = Environment(EnvConfig(constant_reference=[1, 0, 0, 0, 0, 0]))
    traj = run_episode(env, PidController(env.input_limits, DEFAULT_PID_GAINS))
    m = compute_metrics(traj, "roll", 1.0)
    assert m.settling_time < 5.0
    assert m.steady_state_error < 0.05

    code = cli_main(
        ["compare", "--seed", "17", "--axis", "roll", "--step-amplitude", "1.0", "--out", str(tmp_path)]
    )
    assert code == 0
    lines = (tmp_path / "metrics_table.csv").read_text().splitlines()
    assert lines[0] == "metric,pid,zero,random"
    assert [line.split(",")[0] for line in lines[1:]] == [title for title, _ in METRIC_ROWS]
    for line in lines[1:]:
        values = [float(v) for v in line.split(",")[1:]]
        assert len(values) == 3 and all(math.isfinite(v) for v in values)
    _ok(
        "pid closed loop and comparison table",
        started,
        f"settle {m.settling_time:.2f}s, sse {m.steady_state_error:.4f} rad",
    )


def test_parallel_batch_determinism(tmp_path):
    started = time.perf_counter()

    def run_cli(workers):
        out = tmp_path / f"report_{workers}.json"
        code = cli_main(
            ["batch", "--seed", "7", "--episodes", "64", "--workers", str(workers),
             "--controller", "pid", "--out", str(out)]
        )
        assert code == 0
        return json.loads(out.read_text())

    serial = run_cli(1)
    parallel = run_cli(8)
    assert len(serial["episode_rewards"]) == 64
    assert serial["episode_rewards"] == parallel["episode_rewards"]
    assert serial["env_seeds"] == parallel["env_seeds"]
    _ok(
        "parallel batch determinism",
        started,
        f"{serial['steps_per_second']:.0f} steps/s serial, {parallel['steps_per_second']:.0f} steps/s x8",
    )


def test_protocol_equivalence_over_tcp():
    started = time.perf_counter()
    server = serve_tcp("127.0.0.1", 0, EnvConfig())
    host, port = server.address
    threading.Thread(target=server.serve_forever, daemon=True).start()
    try:
        with socket.create_connection((host, port), timeout=10) as conn:
            fh = conn.makefile("rw", encoding="utf-8", newline="\n")

            def call(**request):
                fh.write(json.dumps(request) + "\n")
                fh.flush()
                response = json.loads(fh.readline())
                assert response["ok"], response.get("error")
                return response["payload"]

            for episode, seed in enumerate((101, 202, 303)):
                rng = np.random.default_rng(seed)
                actions = rng.uniform(-1.0, 1.0, size=(250, 3)) * [1.2, 1.2, 0.2]

                env = Environment(EnvConfig(seed=seed, stochastic=True))
                sid = call(op="make", payload={"seed": seed, "stochastic": True})["session"]

                expected = [env.reset()]
                remote = [call(op="reset", session=sid)["observation"]]
                expected_rewards, remote_rewards = [], []
                for a in actions:
                    obs, reward, done, _ = env.step(a)
                    expected.append(obs)
                    expected_rewards.append(reward)
                    payload = call(op="step", session=sid, payload={"action": list(a)})
                    remote.append(payload["observation"])
                    remote_rewards.append(payload["reward"])
                assert done and payload["done"]
                assert np.array_equal(np.array(remote), np.array(expected)), f"episode {episode}"
                assert remote_rewards == expected_rewards
                call(op="close", session=sid)
    finally:
        server.shutdown()
        server.server_close()
    _ok("wire protocol equivalence", started, "3 stochastic episodes bit-equal")
