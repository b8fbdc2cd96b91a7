"""Newline-delimited JSON episode protocol over stdio or TCP.

One episode session per connection; sessions share the immutable world.
Requests carry an optional correlation id that is echoed back verbatim.

    -> {"id": 1, "cmd": "reset", "task": "AllObs", "seed": 7}
    <- {"id": 1, "ok": true, "obs": {...}, "reward": 0.0, "done": false, "info": {...}}
    -> {"id": 2, "cmd": "step", "action": "FORWARD"}
    <- {"id": 2, "ok": true, "obs": {...}, "reward": 1.0, "done": false, "info": {...}}

Images travel as base64 row-major 8-bit RGB plus an explicit shape; the
float observation is exactly the decoded bytes divided by 255. A reset with
"fused": true additionally returns the (8, w, w) float32 fusion tensor per
step (base64, little-endian).
"""

from __future__ import annotations

import base64
import json
import socket
import socketserver
import sys

import numpy as np

from .env_core import Episode, EpisodeTerminatedError, IllegalActionError, TASKS
from .observation import Observation, fuse_tensor
from .world import LoadedWorld


class ProtocolError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _encode_obs(obs: Observation, fused: bool) -> dict:
    doc: dict = {}
    if obs.image is not None:
        u8 = np.round(obs.image * 255.0).astype(np.uint8)
        doc["image"] = {
            "shape": list(u8.shape),
            "dtype": "uint8",
            "b64": base64.b64encode(u8.tobytes()).decode(),
        }
    if obs.gps is not None:
        doc["gps"] = [float(v) for v in obs.gps]
    if obs.house_vec is not None:
        doc["house_vec"] = [float(v) for v in obs.house_vec]
    if obs.street_vec is not None:
        doc["street_vec"] = [float(v) for v in obs.street_vec]
    if fused:
        tensor = fuse_tensor(obs)
        doc["fused"] = {
            "shape": list(tensor.shape),
            "dtype": "float32",
            "b64": base64.b64encode(tensor.astype("<f4").tobytes()).decode(),
        }
    return doc


def _encode_info(info: dict) -> dict:
    out = dict(info)
    out["agent_xy_m"] = [float(v) for v in info["agent_xy_m"]]
    out["goal_xy_m"] = [float(v) for v in info["goal_xy_m"]]
    out["hop_distance"] = int(info["hop_distance"])
    out["success"] = bool(info["success"])
    return out


class ProtocolSession:
    """Per-connection request handler: JSON dict in, JSON dict out."""

    def __init__(self, world: LoadedWorld):
        self.world = world
        self.episode: Episode | None = None
        self.fused = False

    def handle_line(self, line: str) -> dict | None:
        """Returns a response record, or None when the session should close."""
        msg = None
        try:
            try:
                msg = json.loads(line)
            except json.JSONDecodeError as e:
                raise ProtocolError("bad_request", f"malformed JSON: {e}") from None
            if not isinstance(msg, dict) or "cmd" not in msg:
                raise ProtocolError("bad_request", "message must be an object with a 'cmd' field")
            return self._dispatch(msg)
        except ProtocolError as e:
            rid = msg.get("id") if isinstance(msg, dict) else None
            return {"id": rid, "ok": False, "error": {"code": e.code, "message": str(e)}}
        except Exception as e:  # malformed input must never kill the session
            rid = msg.get("id") if isinstance(msg, dict) else None
            return {"id": rid, "ok": False, "error": {"code": "internal", "message": str(e)}}

    def _dispatch(self, msg: dict) -> dict | None:
        cmd = msg["cmd"]
        rid = msg.get("id")
        if cmd == "reset":
            return self._reset(msg, rid)
        if cmd == "step":
            return self._step(msg, rid)
        if cmd == "info":
            return {"id": rid, "ok": True, "world": self._world_info()}
        if cmd == "close":
            return None
        raise ProtocolError("unknown_cmd", f"unknown cmd {cmd!r}")

    def _reset(self, msg: dict, rid) -> dict:
        task = msg.get("task", "AllObs")
        if task not in TASKS:
            raise ProtocolError("bad_param", f"unknown task {task!r}; tasks: {sorted(TASKS)}")
        seed = msg.get("seed")
        if seed is not None and not isinstance(seed, int):
            raise ProtocolError("bad_param", "seed must be an integer")
        self.fused = bool(msg.get("fused", False))
        kwargs = {}
        if "gps_sigma" in msg:
            kwargs["gps_sigma"] = float(msg["gps_sigma"])
        if "horizon" in msg:
            kwargs["horizon"] = int(msg["horizon"])
        self.episode = Episode(self.world, task, **kwargs)
        obs, info = self.episode.reset(seed=seed)
        return {
            "id": rid,
            "ok": True,
            "obs": _encode_obs(obs, self.fused),
            "reward": 0.0,
            "done": False,
            "info": _encode_info(info),
        }

    def _step(self, msg: dict, rid) -> dict:
        if self.episode is None or self.episode.state is None:
            raise ProtocolError("no_active_episode", "no active episode; send reset first")
        if "action" not in msg:
            raise ProtocolError("bad_param", "step requires an 'action' field")
        try:
            result = self.episode.step(msg["action"])
        except IllegalActionError as e:
            raise ProtocolError("illegal_action", str(e)) from None
        except EpisodeTerminatedError as e:
            raise ProtocolError("episode_done", str(e)) from None
        except ValueError as e:
            raise ProtocolError("bad_param", str(e)) from None
        return {
            "id": rid,
            "ok": True,
            "obs": _encode_obs(result.observation, self.fused),
            "reward": float(result.reward),
            "done": bool(result.done),
            "info": _encode_info(result.info),
        }

    def _world_info(self) -> dict:
        return {
            "format_version": self.world.meta.get("format_version"),
            "num_nodes": self.world.graph.num_nodes,
            "num_addresses": len(self.world.goal_index),
            "vocabulary": list(self.world.vocabulary),
            "horizon": self.world.meta.get("horizon"),
            "tasks": {
                name: {
                    "actions": [a.name for a in cfg.legal_actions],
                    "observations": {"img": cfg.obs_img, "gps": cfg.obs_gps, "txt": cfg.obs_txt},
                }
                for name, cfg in TASKS.items()
            },
            "low_size": self.world.meta.get("low_size"),
            "full_size": self.world.meta.get("full_size"),
        }


def serve_stdio(world: LoadedWorld, stdin=None, stdout=None) -> None:
    """Serve one session over stdin/stdout; returns at EOF or close."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    session = ProtocolSession(world)
    for line in stdin:
        if not line.strip():
            continue
        response = session.handle_line(line)
        if response is None:
            break
        stdout.write(json.dumps(response, sort_keys=True) + "\n")
        stdout.flush()


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        session = ProtocolSession(self.server.world)  # type: ignore[attr-defined]
        while True:
            line = self.rfile.readline()
            if not line:
                return
            text = line.decode("utf-8", errors="replace").strip()
            if not text:
                continue
            response = session.handle_line(text)
            if response is None:
                return
            self.wfile.write((json.dumps(response, sort_keys=True) + "\n").encode())


class ProtocolServer(socketserver.ThreadingTCPServer):
    """One session per TCP connection; all sessions share the world."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, world: LoadedWorld, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _Handler)
        self.world = world

    @property
    def address(self) -> tuple[str, int]:
        return self.socket.getsockname()


def serve_tcp(world: LoadedWorld, host: str = "127.0.0.1", port: int = 5555) -> None:
    with ProtocolServer(world, host, port) as server:
        server.serve_forever()


class ProtocolClient:
    """Minimal line-oriented client for the TCP transport (used in tests)."""

    def __init__(self, host: str, port: int, timeout: float = 30.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.file = self.sock.makefile("rwb")
        self._next_id = 0

    def request(self, **msg) -> dict:
        self._next_id += 1
        msg.setdefault("id", self._next_id)
        self.file.write((json.dumps(msg) + "\n").encode())
        self.file.flush()
        line = self.file.readline()
        if not line:
            raise ConnectionError("server closed the connection")
        return json.loads(line)

    def close(self) -> None:
        try:
            self.file.write((json.dumps({"cmd": "close"}) + "\n").encode())
            self.file.flush()
        except OSError:
            pass
        self.sock.close()
