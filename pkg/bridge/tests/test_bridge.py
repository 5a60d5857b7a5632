import numpy as np
import pytest

import quadsim_bridge as qb

FAST = dict(control_frequency=10.0, sim_frequency=50.0)


@pytest.fixture(scope="module")
def server():
    managed = qb.ManagedServer()
    yield managed
    managed.close()


@pytest.fixture()
def remote_env(server):
    env = qb.QuadSimEnv(host=server.host, port=server.port, seed=7, **FAST)
    yield env
    env.close()


class TestMake:
    def test_rejects_unknown_id(self):
        with pytest.raises(qb.BridgeError, match="QuadSim-v0"):
            qb.make("CartPole-v1")

    def test_host_without_port_rejected(self):
        with pytest.raises(qb.BridgeError, match="port"):
            qb.QuadSimEnv(host="127.0.0.1")

    def test_unknown_config_key_surfaces_server_error(self, server):
        with pytest.raises(qb.ProtocolFailure, match="episod_time"):
            qb.QuadSimEnv(host=server.host, port=server.port, episod_time=3)


class TestSpaces:
    def test_bounds_come_from_server_spec(self, remote_env):
        spec = remote_env.spec_payload
        np.testing.assert_array_equal(remote_env.action_space.high, spec["U_max"])
        np.testing.assert_array_equal(remote_env.action_space.low, spec["U_min"])
        np.testing.assert_array_equal(remote_env.observation_space.high, spec["soft_state_limits"])
        np.testing.assert_array_equal(remote_env.observation_space.low, -np.asarray(spec["soft_state_limits"]))
        assert remote_env.observation_space.shape == (6,)
        assert remote_env.action_space.shape == (3,)

    def test_float64_no_numeric_transform(self, remote_env):
        obs = remote_env.reset(seed=3)
        assert obs.dtype == np.float64
        # drive an identical raw protocol session: values must be bit-equal
        client = qb.ProtocolClient(*remote_env._client.address)
        made = client.request("make", payload={"seed": 7, **FAST})
        raw_obs = client.request("reset", session=made["session"], payload={"seed": 3})["observation"]
        assert obs.tolist() == raw_obs
        rng = np.random.default_rng(0)
        for _ in range(10):
            action = rng.uniform(remote_env.action_space.low, remote_env.action_space.high)
            bridged = remote_env.step(action)
            raw = client.request(
                "step", session=made["session"], payload={"action": [float(v) for v in action]}
            )
            assert bridged[0].tolist() == raw["observation"]
            assert bridged[1] == raw["reward"]
            assert bridged[2] == raw["done"]
        client.close()


class TestEpisodeLifecycle:
    def test_full_episode_and_recovery(self, remote_env):
        remote_env.reset(seed=1)
        done = False
        steps = 0
        while not done:
            obs, reward, done, info = remote_env.step(np.zeros(3))
            assert reward <= 0.0
            steps += 1
        assert steps == 50
        with pytest.raises(qb.ProtocolFailure, match="reset"):
            remote_env.step(np.zeros(3))
        obs = remote_env.reset()
        assert remote_env.observation_space.contains(obs)

    def test_seeded_runs_repeat(self, server):
        def run():
            env = qb.QuadSimEnv(host=server.host, port=server.port, seed=42, stochastic=True, **FAST)
            obs = [env.reset()]
            rng = np.random.default_rng(1)
            for _ in range(50):
                o, r, d, _ = env.step(rng.uniform(env.action_space.low, env.action_space.high))
                obs.append(o)
            env.close()
            return np.array(obs)

        np.testing.assert_array_equal(run(), run())

    def test_closed_env_rejects_use(self, server):
        env = qb.QuadSimEnv(host=server.host, port=server.port, **FAST)
        env.close()
        env.close()  # idempotent
        with pytest.raises(qb.BridgeError, match="closed"):
            env.reset()


class TestConformance:
    def test_passes_environment_checker(self, server):
        env = qb.QuadSimEnv(host=server.host, port=server.port, **FAST)
        try:
            qb.check_env(env, seed=5)
        finally:
            env.close()

    def test_checker_rejects_lying_env(self, server):
        class Broken(qb.QuadSimEnv):
            def reset(self, seed=None):
                return np.full(6, 99.0)  # far outside the declared space

        env = Broken(host=server.host, port=server.port, **FAST)
        try:
            with pytest.raises(qb.ConformanceError, match="reset"):
                qb.check_env(env)
        finally:
            env.close()


class TestManagedServerPath:
    def test_owned_server_lifecycle(self):
        env = qb.make("QuadSim-v0", seed=1, **FAST)
        obs = env.reset()
        assert env.observation_space.contains(obs)
        env.close()
