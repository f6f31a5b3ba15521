"""Synthetic surveillance scenes with known background and foreground."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .volume import FrameGeometry, VideoVolume


@dataclass(frozen=True)
class Sprite:
    """Axis-aligned rectangle moving linearly; ``offset`` is added to the background.

    ``offset`` is a scalar, or a 3-tuple (R, G, B) for color scenes. Position
    at frame ``j`` is ``(x0 + vx*j, y0 + vy*j)`` rounded to whole pixels.
    """

    width: int
    height: int
    x0: float
    y0: float
    vx: float = 0.0
    vy: float = 0.0
    offset: object = 80.0

    def position(self, j: int) -> tuple:
        return int(round(self.x0 + self.vx * j)), int(round(self.y0 + self.vy * j))


@dataclass(frozen=True)
class SceneSpec:
    geometry: FrameGeometry
    frames: int
    sprites: Sequence[Sprite] = ()
    illumination: Optional[Sequence[float]] = None
    base_level: float = 110.0
    gradient: float = 60.0
    texture: float = 20.0
    peak: float = 255.0

    def illum(self) -> np.ndarray:
        if self.illumination is None:
            return np.ones(self.frames)
        il = np.asarray(self.illumination, dtype=np.float64)
        if il.shape != (self.frames,):
            raise ValueError(f"need {self.frames} illumination factors, got {il.shape}")
        return il


@dataclass(frozen=True)
class Scene:
    volume: VideoVolume
    background: VideoVolume
    masks: list = field(default_factory=list)


def _background(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    g = spec.geometry
    yy, xx = np.mgrid[0:g.height, 0:g.width]
    ramp = spec.gradient * (xx / max(g.width - 1, 1) * 0.6 + yy / max(g.height - 1, 1) * 0.4)
    img = spec.base_level + ramp - spec.gradient / 2
    planes = []
    for c in range(g.channels):
        tex = rng.uniform(-spec.texture, spec.texture, size=(g.height, g.width))
        tint = 1.0 if g.channels == 1 else (0.85, 1.0, 1.15)[c]
        planes.append(np.clip(img * tint + tex, 0, spec.peak))
    return np.concatenate([p.reshape(-1) for p in planes])


def generate_scene(spec: SceneSpec, seed: int = 0) -> Scene:
    """Render the scene; returns the volume, its background and per-frame sprite masks.

    Background frame ``j`` is the clamped background image scaled by the
    illumination factor, so the background volume has rank one unless
    clamping bites.
    """
    g = spec.geometry
    rng = np.random.default_rng(seed)
    base = _background(spec, rng)
    illum = spec.illum()
    bg = np.clip(np.outer(base, illum), 0, spec.peak)
    vol = bg.copy()
    masks = []
    for j in range(spec.frames):
        mask = np.zeros((g.height, g.width), dtype=bool)
        for s in spec.sprites:
            x, y = s.position(j)
            if x < 0 or y < 0 or x + s.width > g.width or y + s.height > g.height:
                raise ValueError(f"sprite {s} leaves the frame at frame {j}")
            mask[y:y + s.height, x:x + s.width] = True
            off = np.broadcast_to(np.asarray(s.offset, dtype=np.float64), (g.channels,))
            for c in range(g.channels):
                block = vol[c * g.n:(c + 1) * g.n, j].reshape(g.height, g.width)
                block[y:y + s.height, x:x + s.width] += off[c]
        masks.append(mask)
    np.clip(vol, 0, spec.peak, out=vol)
    return Scene(VideoVolume(g, vol), VideoVolume(g, bg), masks)


def moving_square_scene(width: int = 64, height: int = 64, frames: int = 20,
                        size: int = 8, channels: int = 1, illumination=None,
                        offset=80.0) -> SceneSpec:
    """One square crossing the frame diagonally; the default harness scene."""
    geom = FrameGeometry(width, height, channels)
    span_x = width - size - 4
    span_y = height - size - 4
    vx = span_x / max(frames - 1, 1)
    vy = span_y / max(frames - 1, 1) * 0.5
    sprite = Sprite(size, size, 2, 2 + span_y * 0.25, vx, vy, offset)
    return SceneSpec(geom, frames, (sprite,), illumination)


def step_illumination(frames: int, low: float = 0.6, at: Optional[int] = None) -> np.ndarray:
    at = frames // 2 if at is None else at
    il = np.ones(frames)
    il[at:] = low
    return il
