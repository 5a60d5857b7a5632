"""Line-oriented JSON client and simulation-server process management."""

from __future__ import annotations

import atexit
import json
import socket
import subprocess
import sys
import time

from .errors import ProtocolFailure


class ProtocolClient:
    """Blocking request/response client for the newline-delimited JSON protocol."""

    def __init__(self, host: str, port: int, timeout: float = 30.0):
        self.address = (host, port)
        self._sock = socket.create_connection(self.address, timeout=timeout)
        self._file = self._sock.makefile("rw", encoding="utf-8", newline="\n")

    def request(self, op: str, session: str | None = None, payload: dict | None = None) -> dict:
        message: dict = {"op": op}
        if session is not None:
            message["session"] = session
        if payload is not None:
            message["payload"] = payload
        try:
            self._file.write(json.dumps(message) + "\n")
            self._file.flush()
            line = self._file.readline()
        except OSError as exc:
            raise ProtocolFailure(f"connection to {self.address} failed: {exc}") from exc
        if not line:
            raise ProtocolFailure(f"server at {self.address} closed the connection")
        response = json.loads(line)
        if not response.get("ok"):
            raise ProtocolFailure(response.get("error", "unknown server error"))
        return response.get("payload", {})

    def close(self) -> None:
        try:
            self._file.close()
            self._sock.close()
        except OSError:
            pass


class ManagedServer:
    """A simulation server child process, discovered through its announce line."""

    def __init__(self, config_path: str | None = None, startup_timeout: float = 30.0):
        command = [sys.executable, "-m", "quadsim", "serve", "--port", "0"]
        if config_path is not None:
            command += ["--config", str(config_path)]
        self._proc = subprocess.Popen(
            command,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
        )
        atexit.register(self.close)
        deadline = time.monotonic() + startup_timeout
        line = self._proc.stdout.readline()
        if not line:
            if time.monotonic() > deadline:
                raise ProtocolFailure("simulation server did not start in time")
            raise ProtocolFailure("simulation server exited before announcing its port")
        event = json.loads(line)
        if event.get("event") != "listening":
            raise ProtocolFailure(f"unexpected server announcement: {line!r}")
        self.host = event["host"]
        self.port = int(event["port"])

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
