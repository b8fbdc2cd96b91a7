"""Gym-style adapter for the sidewalk-sim wire protocol, plus a smoke-scale
PPO trainer on the engine-side fusion tensor."""

from .client import EngineClient, EngineConnectionError
from .env import AdapterEnv, AdapterError, Box, Discrete, DictSpace, EpisodeOver, IllegalAction, make
from .train_smoke import FusionPolicy, SmokeConfig, evaluate, train_smoke

__version__ = "0.1.0"

__all__ = [
    "AdapterEnv",
    "AdapterError",
    "Box",
    "DictSpace",
    "Discrete",
    "EngineClient",
    "EngineConnectionError",
    "EpisodeOver",
    "FusionPolicy",
    "IllegalAction",
    "SmokeConfig",
    "evaluate",
    "make",
    "train_smoke",
]
