"""Secondary acceptance: a short policy-gradient run against the remote
environment completes without API errors and improves on its own early
episodes. Everything in the stack is seeded, so the outcome is reproducible.
"""

import time

import pytest

torch = pytest.importorskip("torch")

import quadsim_bridge as qb
from quadsim_bridge.training import smoke_config, train_reinforce


def test_training_run_completes_and_improves():
    started = time.perf_counter()
    env = qb.make("QuadSim-v0", **smoke_config())
    try:
        result = train_reinforce(env, total_steps=10_000, seed=4)
    finally:
        env.close()
    assert result.total_steps == 10_000
    first = result.mean_return(first=10)
    last = result.mean_return(last=10)
    assert last > first, f"no improvement: first-10 {first:.2f}, last-10 {last:.2f}"
    print(
        f"[PASS] training smoke ({result.total_steps} steps, "
        f"first-10 {first:.1f} -> last-10 {last:.1f}) [{time.perf_counter() - started:.0f}s]"
    )
