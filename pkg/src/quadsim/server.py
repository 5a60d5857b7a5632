"""Newline-delimited JSON protocol exposing environments to external agents.

Requests are one JSON object per line:

    {"op": "make"|"reset"|"step"|"close"|"spec", "session": "...", "payload": {...}}

and every request gets exactly one response line, either
``{"ok": true, "payload": ...}`` or ``{"ok": false, "error": "..."}``.
Sessions are owned by the connection that created them; requests on one
connection are processed strictly in order.
"""

from __future__ import annotations

import json
import math
import socketserver
import sys
import uuid

import numpy as np

from .config import env_config_to_dict, parse_env_config
from .dynamics import compute_hard_state_limits, compute_input_limits, soft_state_limits
from .env import EnvConfig, Environment
from .errors import EpisodeDoneError, QuadSimError


def _json_safe(value):
    if isinstance(value, np.ndarray):
        return [float(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _space_payload(env: Environment) -> dict:
    soft = env.state_limits.soft
    return {
        "observation_shape": [6],
        "observation_low": [-float(v) for v in soft],
        "observation_high": [float(v) for v in soft],
        "action_shape": [3],
        "action_low": [float(v) for v in env.input_limits.U_min],
        "action_high": [float(v) for v in env.input_limits.U_max],
    }


def _limits_payload(config: EnvConfig) -> dict:
    p = config.quad_params
    limits = compute_input_limits(p)
    return {
        "w_min": p.w_min,
        "w_max": p.w_max,
        "U_max": [float(v) for v in limits.U_max],
        "U_min": [float(v) for v in limits.U_min],
        "hard_state_limits": [float(v) for v in compute_hard_state_limits(p, 0.0, config.episode_time)],
        "soft_state_limits": [float(v) for v in soft_state_limits(p)],
        "episode_steps": int(round(config.episode_time * config.control_frequency)),
    }


class SessionBroker:
    """Per-connection session registry and request dispatcher."""

    def __init__(self, default_config: EnvConfig):
        self.default_config = default_config
        self.sessions: dict[str, Environment] = {}

    def handle_line(self, line: str) -> dict:
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            return {"ok": False, "error": f"parse error: {exc}"}
        if not isinstance(request, dict):
            return {"ok": False, "error": "parse error: request must be a JSON object"}
        op = request.get("op")
        payload = request.get("payload") or {}
        if not isinstance(payload, dict):
            return {"ok": False, "error": "payload must be a JSON object"}
        try:
            if op == "make":
                return self._make(payload)
            if op == "spec":
                return self._spec(request)
            if op in ("reset", "step", "close"):
                env = self._session(request)
                if op == "reset":
                    return self._reset(env, payload)
                if op == "step":
                    return self._step(env, payload)
                sid = request["session"]
                del self.sessions[sid]
                return {"ok": True, "payload": {"closed": sid}}
            return {"ok": False, "error": f"unknown op: {op!r}"}
        except _SessionError as exc:
            return {"ok": False, "error": str(exc)}
        except EpisodeDoneError as exc:
            return {"ok": False, "error": str(exc)}
        except (QuadSimError, ValueError, TypeError) as exc:
            return {"ok": False, "error": f"{type(exc).__name__}: {exc}"}

    def _session(self, request) -> Environment:
        sid = request.get("session")
        if not isinstance(sid, str) or sid not in self.sessions:
            raise _SessionError(f"unknown session: {sid!r}")
        return self.sessions[sid]

    def _make(self, payload: dict) -> dict:
        merged = env_config_to_dict(self.default_config)
        for key, value in payload.items():
            if key == "quad_params" and isinstance(value, dict):
                merged["quad_params"] = {**merged["quad_params"], **value}
            elif key == "integrator" and isinstance(value, dict):
                merged["integrator"] = {**merged["integrator"], **value}
            else:
                merged[key] = value
        env = Environment(parse_env_config(merged, where="make payload"))
        sid = uuid.uuid4().hex[:12]
        self.sessions[sid] = env
        return {"ok": True, "payload": {"session": sid, **_space_payload(env)}}

    def _spec(self, request) -> dict:
        sid = request.get("session")
        if sid:
            env = self._session(request)
            return {"ok": True, "payload": {**_limits_payload(env.config), **_space_payload(env)}}
        return {"ok": True, "payload": _limits_payload(self.default_config)}

    def _reset(self, env: Environment, payload: dict) -> dict:
        if "seed" in payload and payload["seed"] is not None:
            env.seed(int(payload["seed"]))
        obs = env.reset()
        return {"ok": True, "payload": {"observation": _json_safe(obs)}}

    def _step(self, env: Environment, payload: dict) -> dict:
        action = payload.get("action")
        if not isinstance(action, (list, tuple)) or len(action) != 3:
            raise ValueError(f"step payload must contain a 3-element 'action', got {action!r}")
        values = [float(v) for v in action]
        if not all(math.isfinite(v) for v in values):
            raise ValueError("action must be finite")
        result = env.step(np.asarray(values))
        return {
            "ok": True,
            "payload": {
                "observation": _json_safe(result.observation),
                "reward": float(result.reward),
                "done": bool(result.done),
                "info": _json_safe(result.info),
            },
        }

    def close_all(self) -> None:
        self.sessions.clear()


class _SessionError(QuadSimError):
    pass


class _LineHandler(socketserver.StreamRequestHandler):
    def handle(self):
        broker = SessionBroker(self.server.default_config)
        try:
            for raw in self.rfile:
                line = raw.decode("utf-8", errors="replace").strip()
                if not line:
                    continue
                response = broker.handle_line(line)
                self.wfile.write((json.dumps(response) + "\n").encode("utf-8"))
                self.wfile.flush()
        finally:
            broker.close_all()


class EnvServer(socketserver.ThreadingTCPServer):
    """One handler thread per connection; sessions die with their connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, default_config: EnvConfig):
        super().__init__(address, _LineHandler)
        self.default_config = default_config

    @property
    def address(self) -> tuple[str, int]:
        host, port = self.server_address[:2]
        return host, port


def serve_tcp(host: str, port: int, default_config: EnvConfig, announce=None) -> EnvServer:
    """Bind and return the server; caller decides when to serve_forever()."""
    server = EnvServer((host, port), default_config)
    if announce is not None:
        bound_host, bound_port = server.address
        announce(json.dumps({"event": "listening", "host": bound_host, "port": bound_port}))
    return server


def serve_stdio(default_config: EnvConfig, stdin=None, stdout=None) -> None:
    """Speak the protocol on stdin/stdout; returns at end of input."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    broker = SessionBroker(default_config)
    try:
        for raw in stdin:
            line = raw.strip()
            if not line:
                continue
            stdout.write(json.dumps(broker.handle_line(line)) + "\n")
            stdout.flush()
    finally:
        broker.close_all()
