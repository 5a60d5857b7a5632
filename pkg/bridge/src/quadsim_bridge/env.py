"""Remote attitude-tracking environment speaking the simulation wire protocol.

The class follows the classic episodic API: ``reset() -> observation`` and
``step(action) -> (observation, reward, done, info)``. All numbers come back
exactly as the server serialized them (float64, no rescaling), so a remote
run is bit-identical to driving the server by hand.
"""

from __future__ import annotations

import numpy as np

from .errors import BridgeError
from .protocol import ManagedServer, ProtocolClient
from .spaces import Box

ENV_ID = "QuadSim-v0"


class QuadSimEnv:
    """One protocol session presented as an episodic environment.

    Without ``host``/``port`` a private simulation server process is started
    and owned by this instance. Remaining keyword arguments are forwarded
    verbatim as the session configuration (seed, episode_time,
    constant_reference, dynamics_kind, stochastic, quad_params, ...).
    """

    metadata = {"render_modes": []}

    def __init__(self, host: str | None = None, port: int | None = None, **config):
        self._server = None
        if host is None:
            self._server = ManagedServer()
            host, port = self._server.host, self._server.port
        elif port is None:
            raise BridgeError("port is required when host is given")
        self._client = ProtocolClient(host, port)
        self._config = dict(config)
        made = self._client.request("make", payload=self._config)
        self._session = made["session"]
        self.observation_space = Box(low=made["observation_low"], high=made["observation_high"])
        self.action_space = Box(low=made["action_low"], high=made["action_high"])
        self.spec_payload = self._client.request("spec", session=self._session)
        self._pending_seed = config.get("seed")
        self._closed = False

    def seed(self, seed: int | None) -> None:
        """Apply at the next reset; the protocol reseeds through reset."""
        self._pending_seed = seed
        self.action_space.seed(seed)

    def reset(self, seed: int | None = None) -> np.ndarray:
        self._check_open()
        if seed is not None:
            self._pending_seed = seed
        payload = {}
        if self._pending_seed is not None:
            payload["seed"] = self._pending_seed
            self._pending_seed = None
        result = self._client.request("reset", session=self._session, payload=payload)
        return np.asarray(result["observation"], dtype=np.float64)

    def step(self, action):
        self._check_open()
        arr = np.asarray(action, dtype=np.float64)
        if arr.shape != self.action_space.shape:
            raise ValueError(f"action shape {arr.shape} does not match {self.action_space.shape}")
        result = self._client.request(
            "step", session=self._session, payload={"action": [float(v) for v in arr]}
        )
        observation = np.asarray(result["observation"], dtype=np.float64)
        return observation, float(result["reward"]), bool(result["done"]), dict(result["info"])

    def render(self) -> None:
        pass

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self._client.request("close", session=self._session)
        except BridgeError:
            pass
        self._client.close()
        if self._server is not None:
            self._server.close()

    def _check_open(self) -> None:
        if self._closed:
            raise BridgeError("environment is closed")

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def make(env_id: str, **kwargs) -> QuadSimEnv:
    """Construct a registered environment by id."""
    if env_id != ENV_ID:
        raise BridgeError(f"unknown environment id {env_id!r}; this package provides {ENV_ID!r}")
    return QuadSimEnv(**kwargs)
