"""Foreground silhouettes and quality scores."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .framelet import N_BANDS, FrameletTransform
from .volume import FrameGeometry, GeometryMismatch, VideoVolume

# Gaussian-consistent scale factor for the median absolute value
MAD_SCALE = 1.4826


@dataclass(frozen=True, eq=False)
class SilhouetteMask:
    geometry: FrameGeometry
    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.size != self.geometry.n:
            raise GeometryMismatch(f"mask has {b.size} entries, geometry needs {self.geometry.n}")
        b = b.reshape(-1).astype(np.uint8)
        if np.any(b > 1):
            raise ValueError("mask entries must be 0 or 1")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def image(self) -> np.ndarray:
        return self.bits.reshape(self.geometry.height, self.geometry.width)

    @property
    def area(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other):
        if not isinstance(other, SilhouetteMask):
            return NotImplemented
        return self.geometry == other.geometry and np.array_equal(self.bits, other.bits)


def median_filter(frame, geometry: FrameGeometry, window: int = 3) -> np.ndarray:
    """``window x window`` median with replicated borders; returns an ``n``-vector."""
    if window < 1 or window % 2 == 0:
        raise ValueError(f"median window must be a positive odd integer, got {window}")
    img = np.asarray(frame, dtype=np.float64).reshape(geometry.height, geometry.width)
    return ndimage.median_filter(img, size=window, mode="nearest").reshape(-1)


def threshold_mask(frame, delta: float, geometry: FrameGeometry = None) -> SilhouetteMask:
    """1 where ``|value| >= delta``."""
    if not delta > 0:
        raise ValueError(f"threshold must be positive, got {delta}")
    frame = np.asarray(frame, dtype=np.float64).reshape(-1)
    if geometry is None:
        geometry = FrameGeometry(frame.size, 1)
    return SilhouetteMask(geometry, np.abs(frame) >= delta)


def magnitude(X2: VideoVolume) -> np.ndarray:
    """Per-pixel foreground magnitude, ``n x J``; the 2-norm across channels for color."""
    g = X2.geometry
    if g.channels == 1:
        return X2.data
    return np.sqrt(np.sum(X2.data.reshape(3, g.n, -1) ** 2, axis=0))


def noise_scale(X2: VideoVolume) -> float:
    """Robust noise estimate ``1.4826 * median(|d|)`` over the high-pass framelet
    coefficients of the foreground magnitude, each band scaled to unit filter norm."""
    g = X2.geometry.gray()
    t = FrameletTransform(g)
    coef = t.analyze_volume(magnitude(X2)).reshape(N_BANDS, g.n, -1)
    norms = np.array([np.linalg.norm(np.outer(fj, fi)) for fi in t.masks for fj in t.masks])
    detail = coef[1:] / norms[1:, None, None]
    return MAD_SCALE * float(np.median(np.abs(detail)))


def default_delta(X2: VideoVolume, factor: float = 5.0, floor: float = 0.5) -> float:
    """``factor`` robust noise scales, or ``floor`` when the estimate is zero.

    A zero estimate means most detail coefficients vanish (noise-free or
    quantized data), so any visible deviation counts as foreground.
    """
    s = noise_scale(X2)
    return factor * s if s > 0 else floor


def silhouette(X2: VideoVolume, frame_index: int, delta: float,
               window: int = 3) -> SilhouetteMask:
    """Median-filter frame ``frame_index`` of the foreground, then threshold it."""
    J = X2.frame_count
    if not 0 <= frame_index < J:
        raise IndexError(f"frame {frame_index} out of range for {J} frames")
    g = X2.geometry.gray()
    col = magnitude(X2)[:, frame_index]
    return threshold_mask(median_filter(col, g, window), delta, g)


def silhouettes(X2: VideoVolume, delta: float = None, window: int = 3) -> list:
    if delta is None:
        delta = default_delta(X2)
    return [silhouette(X2, j, delta, window) for j in range(X2.frame_count)]


def psnr(a, b, peak: float = 255.0) -> float:
    """``10 log10(peak^2 / MSE)`` over all entries; ``inf`` when identical."""
    if not peak > 0:
        raise ValueError("peak must be positive")
    a = np.asarray(getattr(a, "data", a), dtype=np.float64)
    b = np.asarray(getattr(b, "data", b), dtype=np.float64)
    if a.shape != b.shape:
        raise GeometryMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return float("inf")
    return 10.0 * np.log10(peak * peak / mse)


def mask_iou(a: SilhouetteMask, b: SilhouetteMask) -> float:
    """Intersection over union; two empty masks score 1."""
    if a.geometry != b.geometry:
        raise GeometryMismatch("masks have different geometry")
    inter = int(np.sum(a.bits & b.bits))
    union = int(np.sum(a.bits | b.bits))
    return 1.0 if union == 0 else inter / union
