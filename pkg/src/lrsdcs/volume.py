"""Video volume data model.

A video volume is a matrix whose column ``j`` is frame ``j`` flattened in
row-major pixel order. Color volumes stack the R, G and B planes as row
blocks, so a color volume has ``3 * n`` rows for ``n`` pixels per frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Rec.601 luma weights
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


class GeometryMismatch(ValueError):
    """Frames or volumes do not share a common geometry."""


class EmptyInput(ValueError):
    """An operation that needs at least one frame received none."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FrameGeometry:
    width: int
    height: int
    channels: int = 1

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"frame size must be positive, got {self.width}x{self.height}")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")

    @property
    def n(self) -> int:
        """Pixels per frame."""
        return self.width * self.height

    @property
    def rows(self) -> int:
        """Rows of a volume matrix with this geometry."""
        return self.channels * self.n

    @property
    def shape(self) -> tuple:
        if self.channels == 1:
            return (self.height, self.width)
        return (self.height, self.width, self.channels)

    def gray(self) -> "FrameGeometry":
        return FrameGeometry(self.width, self.height, 1)


@dataclass(frozen=True, eq=False)
class PixelFrame:
    """One frame as an image array of shape ``(height, width[, 3])``."""

    geometry: FrameGeometry
    samples: np.ndarray
    peak: float = 255.0

    def __post_init__(self):
        s = _frozen(self.samples)
        if s.shape != self.geometry.shape:
            raise GeometryMismatch(
                f"samples of shape {s.shape} do not match geometry {self.geometry.shape}")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_array(cls, a, peak: float = 255.0) -> "PixelFrame":
        a = np.asarray(a)
        if a.ndim == 2:
            geom = FrameGeometry(a.shape[1], a.shape[0], 1)
        elif a.ndim == 3 and a.shape[2] == 3:
            geom = FrameGeometry(a.shape[1], a.shape[0], 3)
        else:
            raise ValueError(f"cannot interpret array of shape {a.shape} as a frame")
        return cls(geom, a, peak)

    def vector(self) -> np.ndarray:
        """Flatten to a column: row-major pixels, channel planes stacked R, G, B."""
        if self.geometry.channels == 1:
            return self.samples.reshape(-1)
        return np.moveaxis(self.samples, 2, 0).reshape(-1)

    def luminance(self) -> "PixelFrame":
        if self.geometry.channels == 1:
            return self
        return PixelFrame(self.geometry.gray(), self.samples @ LUMA_WEIGHTS, self.peak)

    def to_uint8(self) -> np.ndarray:
        """Clamp to ``[0, peak]``, rescale to 8 bits and round."""
        s = np.clip(self.samples, 0.0, self.peak)
        if self.peak != 255.0:
            s = s * (255.0 / self.peak)
        return np.rint(s).astype(np.uint8)

    def __eq__(self, other):
        if not isinstance(other, PixelFrame):
            return NotImplemented
        return (self.geometry == other.geometry and self.peak == other.peak
                and np.array_equal(self.samples, other.samples))


@dataclass(frozen=True, eq=False)
class VideoVolume:
    """``(channels * n) x J`` matrix of vectorized frames."""

    geometry: FrameGeometry
    data: np.ndarray

    def __post_init__(self):
        d = _frozen(self.data)
        if d.ndim != 2 or d.shape[0] != self.geometry.rows:
            raise GeometryMismatch(
                f"volume data of shape {d.shape} needs {self.geometry.rows} rows")
        object.__setattr__(self, "data", d)

    @property
    def frame_count(self) -> int:
        return self.data.shape[1]

    @property
    def size(self) -> int:
        return self.data.size

    def frame(self, j: int) -> np.ndarray:
        """Frame ``j`` as an image array."""
        return column_to_image(self.data[:, j], self.geometry)

    def channel(self, c: int) -> "VideoVolume":
        n = self.geometry.n
        return VideoVolume(self.geometry.gray(), self.data[c * n:(c + 1) * n])

    def __eq__(self, other):
        if not isinstance(other, VideoVolume):
            return NotImplemented
        return self.geometry == other.geometry and np.array_equal(self.data, other.data)


def column_to_image(col: np.ndarray, geometry: FrameGeometry) -> np.ndarray:
    if geometry.channels == 1:
        return col.reshape(geometry.height, geometry.width)
    return np.moveaxis(col.reshape(3, geometry.height, geometry.width), 0, 2)


def volume_from_frames(frames: Sequence[PixelFrame]) -> VideoVolume:
    if len(frames) == 0:
        raise EmptyInput("no frames given")
    geom = frames[0].geometry
    for j, f in enumerate(frames):
        if f.geometry != geom:
            raise GeometryMismatch(f"frame {j} has geometry {f.geometry}, expected {geom}")
    return VideoVolume(geom, np.stack([f.vector() for f in frames], axis=1))


def volume_to_frames(v: VideoVolume, peak: float = 255.0) -> list:
    """Split a volume into frames. Values are kept as-is; clamping happens on export."""
    return [PixelFrame(v.geometry, v.frame(j), peak) for j in range(v.frame_count)]


def stack_color(r: VideoVolume, g: VideoVolume, b: VideoVolume) -> VideoVolume:
    for v in (r, g, b):
        if v.geometry.channels != 1:
            raise GeometryMismatch("stack_color expects single-channel volumes")
    if not (r.geometry == g.geometry == b.geometry):
        raise GeometryMismatch("channel volumes have different frame geometry")
    if not (r.data.shape == g.data.shape == b.data.shape):
        raise GeometryMismatch("channel volumes have different frame counts")
    geom = FrameGeometry(r.geometry.width, r.geometry.height, 3)
    return VideoVolume(geom, np.vstack([r.data, g.data, b.data]))


def unstack_color(v: VideoVolume) -> tuple:
    if v.geometry.channels != 3:
        raise GeometryMismatch("unstack_color expects a 3-channel volume")
    return tuple(v.channel(c) for c in range(3))


def to_grayscale(v: VideoVolume) -> VideoVolume:
    """Rec.601 luminance of a color volume; grayscale volumes pass through."""
    if v.geometry.channels == 1:
        return v
    n = v.geometry.n
    blocks = v.data.reshape(3, n, -1)
    return VideoVolume(v.geometry.gray(), np.tensordot(LUMA_WEIGHTS, blocks, axes=1))
