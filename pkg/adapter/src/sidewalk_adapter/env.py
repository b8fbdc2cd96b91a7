"""Gym-style environment over the engine wire protocol.

The adapter is a byte-faithful passthrough: observations are decoded from
the wire exactly (base64 uint8 image divided by 255, float vectors as
sent), rewards and done flags untouched. Illegal actions and steps after
termination surface as exceptions, never silent remaps.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass, field

import numpy as np

from .client import EngineClient


class AdapterError(RuntimeError):
    pass


class IllegalAction(ValueError):
    pass


class EpisodeOver(RuntimeError):
    pass


@dataclass(frozen=True)
class Box:
    low: float
    high: float
    shape: tuple[int, ...]
    dtype: str = "float32"

    def contains(self, x) -> bool:
        arr = np.asarray(x)
        return (
            arr.shape == self.shape
            and arr.dtype == np.dtype(self.dtype)
            and bool(np.all(arr >= self.low))
            and bool(np.all(arr <= self.high))
        )


@dataclass(frozen=True)
class Discrete:
    n: int

    def contains(self, x) -> bool:
        return isinstance(x, (int, np.integer)) and 0 <= int(x) < self.n


@dataclass(frozen=True)
class DictSpace:
    spaces: dict = field(default_factory=dict)

    def validate(self, obs: dict) -> None:
        """Every present key must match its declared space; unknown keys fail."""
        for key, value in obs.items():
            if key not in self.spaces:
                raise AdapterError(f"engine sent undeclared observation key {key!r}")
            if not self.spaces[key].contains(value):
                raise AdapterError(
                    f"observation {key!r} violates its declared space {self.spaces[key]}"
                )


def _decode_obs(doc: dict) -> dict:
    obs: dict = {}
    if "image" in doc:
        img = doc["image"]
        raw = np.frombuffer(base64.b64decode(img["b64"]), dtype=np.uint8)
        obs["image"] = (raw.reshape(img["shape"]).astype(np.float32)) / 255.0
    if "gps" in doc:
        obs["gps"] = np.array(doc["gps"], dtype=np.float32)
    if "house_vec" in doc:
        obs["house_vec"] = np.array(doc["house_vec"], dtype=np.float32)
    if "street_vec" in doc:
        obs["street_vec"] = np.array(doc["street_vec"], dtype=np.float32)
    if "fused" in doc:
        fused = doc["fused"]
        obs["fused"] = np.frombuffer(base64.b64decode(fused["b64"]), dtype="<f4").reshape(
            fused["shape"]
        ).copy()
    return obs


class AdapterEnv:
    """One engine session presented through the classic reset/step API.

    `task` is an engine task name (AllObs, NoImg, NoGPS, ImgOnly,
    Intersection, CostlyTxt, Sparse, Explorer). Supply either `endpoint`
    (TCP "host:port"; falls back to SIDEWALK_SIM_ENDPOINT) or `world`
    (bundle path; spawns a stdio engine subprocess). With `fused=True`
    observations are the engine-side (8, w, w) fusion tensor under the
    "fused" key.
    """

    def __init__(
        self,
        task: str = "AllObs",
        endpoint: str | tuple[str, int] | None = None,
        world: str | None = None,
        gps_sigma: float | None = None,
        horizon: int | None = None,
        fused: bool = False,
    ):
        if world is not None:
            self.client = EngineClient.spawn(world)
        else:
            self.client = EngineClient.connect(endpoint)
        self.task = task
        self.fused = fused
        self._gps_sigma = gps_sigma
        self._horizon = horizon
        self._done = True
        self._never_reset = True

        info = self.client.request(cmd="info")
        if not info.get("ok"):
            raise AdapterError(f"engine info failed: {info.get('error')}")
        world_doc = info["world"]
        if task not in world_doc["tasks"]:
            raise AdapterError(f"engine does not know task {task!r}")
        self._task_doc = world_doc["tasks"][task]
        self.action_names: list[str] = list(self._task_doc["actions"])
        self.action_space = Discrete(len(self.action_names))
        self.observation_space = self._build_obs_space(world_doc)
        self.world_info = world_doc

    def _build_obs_space(self, world_doc: dict) -> DictSpace:
        w, h = world_doc["low_size"]
        crop = round(w * 135.0 / 360.0)
        vocab_len = len(world_doc["vocabulary"])
        modalities = self._task_doc["observations"]
        spaces: dict = {}
        if self.fused:
            # the engine sends the raw modalities alongside the fusion tensor
            spaces["fused"] = Box(-np.inf, np.inf, (8, crop, crop))
        if modalities["img"]:
            spaces["image"] = Box(0.0, 1.0, (3, h, crop))
        if modalities["gps"]:
            spaces["gps"] = Box(-np.inf, np.inf, (4,))
        if modalities["txt"]:
            spaces["house_vec"] = Box(0.0, 1.0, (120,))
            spaces["street_vec"] = Box(0.0, 1.0, (vocab_len,))
        return DictSpace(spaces)

    def reset(self, seed: int | None = None) -> dict:
        msg: dict = {"cmd": "reset", "task": self.task, "fused": self.fused}
        if seed is not None:
            msg["seed"] = int(seed)
        if self._gps_sigma is not None:
            msg["gps_sigma"] = self._gps_sigma
        if self._horizon is not None:
            msg["horizon"] = self._horizon
        resp = self.client.request(**msg)
        if not resp.get("ok"):
            raise AdapterError(f"reset failed: {resp.get('error')}")
        self._done = False
        self._never_reset = False
        obs = _decode_obs(resp["obs"])
        self.observation_space.validate(obs)
        self.last_info = resp["info"]
        return obs

    def step(self, action: int | str) -> tuple[dict, float, bool, dict]:
        if self._never_reset:
            raise EpisodeOver("call reset() before step()")
        if self._done:
            raise EpisodeOver("episode is done; call reset()")
        if isinstance(action, str):
            if action not in self.action_names:
                raise IllegalAction(f"{action!r} not in {self.action_names}")
            name = action
        else:
            if not self.action_space.contains(action):
                raise IllegalAction(f"action index {action} outside Discrete({self.action_space.n})")
            name = self.action_names[int(action)]
        resp = self.client.request(cmd="step", action=name)
        if not resp.get("ok"):
            code = resp["error"]["code"]
            if code == "illegal_action":
                raise IllegalAction(resp["error"]["message"])
            if code == "episode_done":
                raise EpisodeOver(resp["error"]["message"])
            raise AdapterError(f"step failed: {resp['error']}")
        obs = _decode_obs(resp["obs"])
        self.observation_space.validate(obs)
        self._done = bool(resp["done"])
        self.last_info = resp["info"]
        return obs, float(resp["reward"]), self._done, resp["info"]

    def close(self) -> None:
        self.client.close()

    def __enter__(self) -> "AdapterEnv":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def make(task: str, **kwargs) -> AdapterEnv:
    """Environment ids map one-to-one onto engine task names."""
    return AdapterEnv(task, **kwargs)
