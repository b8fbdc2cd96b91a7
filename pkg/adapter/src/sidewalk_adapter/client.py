"""Line-oriented client for the engine's newline-delimited JSON protocol.

Two transports: connect to a TCP endpoint, or spawn the engine CLI as a
stdio subprocess. The endpoint can also come from the SIDEWALK_SIM_ENDPOINT
environment variable ("host:port").
"""

from __future__ import annotations

import json
import os
import socket
import subprocess


class EngineConnectionError(ConnectionError):
    pass


class EngineClient:
    def __init__(self, send, recv, close) -> None:
        self._send = send
        self._recv = recv
        self._close = close
        self._next_id = 0

    @classmethod
    def connect(cls, endpoint: str | tuple[str, int] | None = None, timeout: float = 60.0) -> "EngineClient":
        """TCP transport; endpoint "host:port", (host, port), or env var."""
        if endpoint is None:
            endpoint = os.environ.get("SIDEWALK_SIM_ENDPOINT")
            if endpoint is None:
                raise ValueError("no endpoint given and SIDEWALK_SIM_ENDPOINT is unset")
        if isinstance(endpoint, str):
            host, _, port = endpoint.rpartition(":")
            endpoint = (host or "127.0.0.1", int(port))
        sock = socket.create_connection(endpoint, timeout=timeout)
        stream = sock.makefile("rwb")

        def close() -> None:
            try:
                stream.close()
            finally:
                sock.close()

        return cls(stream.write, stream.readline, close, )._with_flusher(stream.flush)

    @classmethod
    def spawn(cls, world: str, executable: str = "sidewalk-sim") -> "EngineClient":
        """Launch `sidewalk-sim serve --stdio` as a child process."""
        proc = subprocess.Popen(
            [executable, "serve", "--world", str(world), "--stdio"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
        )
        assert proc.stdin is not None and proc.stdout is not None

        def close() -> None:
            try:
                proc.stdin.close()
            except OSError:
                pass
            proc.terminate()
            proc.wait(timeout=10)

        client = cls(proc.stdin.write, proc.stdout.readline, close)
        return client._with_flusher(proc.stdin.flush)

    def _with_flusher(self, flush) -> "EngineClient":
        self._flush = flush
        return self

    def request(self, **msg) -> dict:
        """Send one record, wait for its response; raises on connection loss."""
        self._next_id += 1
        msg.setdefault("id", self._next_id)
        try:
            self._send((json.dumps(msg) + "\n").encode())
            self._flush()
            line = self._recv()
        except (OSError, BrokenPipeError) as e:
            raise EngineConnectionError(f"engine connection failed: {e}") from e
        if not line:
            raise EngineConnectionError("engine closed the connection")
        return json.loads(line)

    def close(self) -> None:
        try:
            self._send((json.dumps({"cmd": "close"}) + "\n").encode())
            self._flush()
        except (OSError, EngineConnectionError):
            pass
        self._close()
