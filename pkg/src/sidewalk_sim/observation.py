"""Per-step agent observations: FOV image crop, GPS vector, encoded scene text,
and the fused multi-channel tensor fed to convolutional policies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .annotations import DEFAULT_FOV_DEG
from .spatial_graph import Pose

HOUSE_SLOTS = 3
DIGITS_PER_NUMBER = 4
HOUSE_SLOT_WIDTH = DIGITS_PER_NUMBER * 10  # 40
HOUSE_VEC_LEN = HOUSE_SLOTS * HOUSE_SLOT_WIDTH  # 120
FUSED_CHANNELS = 8  # 3 RGB + 1 GPS + 3 house slots + 1 street


@dataclass
class Observation:
    """Modalities delivered to the agent. Masked-off modalities are None here,
    never zero-filled; zero-filling happens only inside fuse_tensor."""

    image: np.ndarray | None = None  # (3, h, w) float32 in [0, 1]
    gps: np.ndarray | None = None  # (4,) float32
    house_vec: np.ndarray | None = None  # (120,) float32
    street_vec: np.ndarray | None = None  # (V,) float32


def crop_image(panorama: np.ndarray, pose: Pose, fov: float = DEFAULT_FOV_DEG) -> np.ndarray:
    """Horizontal FOV crop of an equirectangular panorama, centered on the heading.

    `panorama` is (H, W, 3) uint8; the crop keeps the full vertical extent,
    wraps around the seam, and returns (3, H, crop_w) float32 scaled to [0, 1]
    by the integer sample maximum.
    """
    if panorama.ndim != 3 or panorama.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) panorama, got {panorama.shape}")
    h, w = panorama.shape[:2]
    crop_w = int(round(w * fov / 360.0))
    center = (pose.bearing + 180.0) / 360.0 * w
    start = int(round(center - crop_w / 2.0)) % w
    cols = (start + np.arange(crop_w)) % w
    crop = panorama[:, cols, :]  # (H, crop_w, 3)
    return np.ascontiguousarray(crop.transpose(2, 0, 1)).astype(np.float32) / 255.0


def resize_square(image_chw: np.ndarray, size: int) -> np.ndarray:
    """Bilinear resize of a (3, H, W) float image to (3, size, size)."""
    from PIL import Image

    u8 = np.clip(image_chw * 255.0, 0, 255).astype(np.uint8).transpose(1, 2, 0)
    out = Image.fromarray(u8).resize((size, size), Image.BILINEAR)
    return np.asarray(out).transpose(2, 0, 1).astype(np.float32) / 255.0


def encode_house_numbers(visible: list[str]) -> np.ndarray:
    """Encode up to three house numbers as stacked 4-digit one-hot blocks.

    Each number is left-padded with '0' to 4 digits; digit d at position p
    (most significant first) of slot s sets index s*40 + p*10 + d. Unused
    slots stay all-zero.
    """
    vec = np.zeros(HOUSE_VEC_LEN, dtype=np.float32)
    for slot, text in enumerate(visible[:HOUSE_SLOTS]):
        if not text.isdigit() or len(text) > DIGITS_PER_NUMBER:
            raise ValueError(f"house number must be 1-4 digits, got {text!r}")
        for p, ch in enumerate(text.zfill(DIGITS_PER_NUMBER)):
            vec[slot * HOUSE_SLOT_WIDTH + p * 10 + int(ch)] = 1.0
    return vec


def encode_street_names(visible: list[str], vocabulary: list[str]) -> np.ndarray:
    """One-hot of the first (largest-area) visible sign's name; zero if none."""
    vec = np.zeros(len(vocabulary), dtype=np.float32)
    if visible:
        name = visible[0]
        try:
            vec[vocabulary.index(name)] = 1.0
        except ValueError:
            raise ValueError(f"street name {name!r} not in vocabulary") from None
    return vec


def scale_to_bbox(xy: tuple[float, float], bbox: tuple[float, float, float, float]) -> np.ndarray:
    """Affine map of a point into [-1, 1] per axis of the world bounding box."""
    min_x, min_y, max_x, max_y = bbox
    ex, ey = max_x - min_x, max_y - min_y
    if ex <= 0.0 or ey <= 0.0:
        raise ValueError(f"degenerate world bounding box {bbox}")
    return np.array(
        [2.0 * (xy[0] - min_x) / ex - 1.0, 2.0 * (xy[1] - min_y) / ey - 1.0],
        dtype=np.float64,
    )


def gps_observation(
    bbox: tuple[float, float, float, float],
    agent_xy: tuple[float, float],
    goal_xy: tuple[float, float],
    noise_sigma: float,
    goal_noise: tuple[float, float],
    rng: np.random.Generator,
) -> np.ndarray:
    """[scaled goal x, scaled goal y, scaled rel x, scaled rel y].

    `goal_noise` is the per-episode goal offset (sampled once at reset); the
    agent-position noise is drawn fresh on every read. sigma=0 is exact.
    """
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    noisy_goal = (goal_xy[0] + goal_noise[0], goal_xy[1] + goal_noise[1])
    if noise_sigma > 0:
        step_eps = rng.normal(0.0, noise_sigma, size=2)
        noisy_agent = (agent_xy[0] + step_eps[0], agent_xy[1] + step_eps[1])
    else:
        noisy_agent = agent_xy
    goal_scaled = scale_to_bbox(noisy_goal, bbox)
    rel_scaled = scale_to_bbox(noisy_agent, bbox) - goal_scaled
    return np.concatenate([goal_scaled, rel_scaled]).astype(np.float32)


def _tile_rows(vec: np.ndarray, w: int) -> np.ndarray:
    """Fill a length-w row by repeating `vec` floor(w/len) times, zero-padded."""
    n = len(vec)
    if w < n:
        raise ValueError(f"cannot tile a length-{n} vector into width {w}")
    reps = w // n
    row = np.zeros(w, dtype=np.float32)
    row[: reps * n] = np.tile(vec, reps)
    return row


def fuse_tensor(obs: Observation, w: int = 84) -> np.ndarray:
    """Stack modalities into the (8, w, w) policy input tensor.

    Channels 0-2 are RGB; channel 3 tiles the GPS 4-vector; channels 4-6 tile
    the three 40-wide house-number slots; channel 7 tiles the street-name
    one-hot. Each vector fills every row of its channel identically. Absent
    modalities yield all-zero channels.
    """
    out = np.zeros((FUSED_CHANNELS, w, w), dtype=np.float32)
    if obs.image is not None:
        if obs.image.shape != (3, w, w):
            raise ValueError(f"image shape {obs.image.shape} != (3, {w}, {w})")
        out[0:3] = obs.image
    if obs.gps is not None:
        out[3, :, :] = _tile_rows(obs.gps, w)
    if obs.house_vec is not None:
        for slot in range(HOUSE_SLOTS):
            sl = obs.house_vec[slot * HOUSE_SLOT_WIDTH : (slot + 1) * HOUSE_SLOT_WIDTH]
            out[4 + slot, :, :] = _tile_rows(sl, w)
    if obs.street_vec is not None:
        out[7, :, :] = _tile_rows(obs.street_vec, w)
    return out
