"""Undecimated piecewise-linear B-spline framelet, one level, per frame.

The three 1-D masks form a tight frame on sequences; with half-sample
symmetric boundary extension the finite-length analysis matrices still
satisfy ``sum_i A_i^T A_i = I``. Tensor products give nine 2-D subbands,
so ``analyze`` maps ``n`` pixels to ``9n`` coefficients and
``synthesize(analyze(a)) == a``.

Subband ``(i, j)`` applies ``h_i`` along the horizontal axis (width) and
``h_j`` along the vertical axis (height). Bands are stored in the order
``h0h0, h0h1, h0h2, h1h0, ..., h2h2``.
"""

from __future__ import annotations

import numpy as np

from .volume import FrameGeometry

MASKS = (
    np.array([1.0, 2.0, 1.0]) / 4.0,
    np.array([1.0, 0.0, -1.0]) * (np.sqrt(2.0) / 4.0),
    np.array([-1.0, 2.0, -1.0]) / 4.0,
)
N_BANDS = 9


def _filter(x: np.ndarray, f: np.ndarray, axis: int) -> np.ndarray:
    # y[k] = f[0] x[k-1] + f[1] x[k] + f[2] x[k+1], half-sample symmetric ends
    x = np.moveaxis(x, axis, 0)
    p = np.concatenate((x[:1], x, x[-1:]), axis=0)
    y = f[0] * p[:-2] + f[1] * p[1:-1] + f[2] * p[2:]
    return np.moveaxis(y, 0, axis)


def _filter_adjoint(y: np.ndarray, f: np.ndarray, axis: int) -> np.ndarray:
    y = np.moveaxis(y, axis, 0)
    n = y.shape[0]
    z = np.zeros((n + 2,) + y.shape[1:])
    # scatter into the extended index range -1..n, then fold the ends back
    z[:-2] += f[0] * y
    z[1:-1] += f[1] * y
    z[2:] += f[2] * y
    out = z[1:-1].copy()
    out[0] += z[0]
    out[-1] += z[-1]
    return np.moveaxis(out, 0, axis)


class FrameletTransform:
    """Framelet analysis/synthesis for frames of a fixed size.

    Frames are handled as ``(height, width, ...)`` arrays internally; any
    trailing axes (frames, channels) are transformed independently.
    """

    def __init__(self, geometry: FrameGeometry):
        self.geometry = geometry.gray()
        self.masks = MASKS
        self.levels = 1

    @property
    def n(self) -> int:
        return self.geometry.n

    def _grid(self, a: np.ndarray) -> np.ndarray:
        g = self.geometry
        if a.shape[0] != g.n:
            raise ValueError(f"expected {g.n} pixels per frame, got {a.shape[0]}")
        return a.reshape((g.height, g.width) + a.shape[1:])

    def _analyze(self, a: np.ndarray) -> np.ndarray:
        # a: (n, ...) -> (9, n, ...)
        img = self._grid(np.asarray(a, dtype=np.float64))
        horiz = [_filter(img, f, axis=1) for f in self.masks]
        bands = [_filter(hx, f, axis=0) for hx in horiz for f in self.masks]
        return np.stack(bands).reshape((N_BANDS, self.n) + a.shape[1:])

    def _synthesize(self, c: np.ndarray) -> np.ndarray:
        c = np.asarray(c, dtype=np.float64)
        if c.shape[:2] != (N_BANDS, self.n):
            raise ValueError(f"expected coefficients of shape (9, {self.n}, ...), got {c.shape}")
        g = self.geometry
        c = c.reshape((N_BANDS, g.height, g.width) + c.shape[2:])
        out = 0.0
        for i, fi in enumerate(self.masks):
            vert = sum(_filter_adjoint(c[3 * i + j], fj, axis=0)
                       for j, fj in enumerate(self.masks))
            out = out + _filter_adjoint(vert, fi, axis=1)
        return out.reshape((self.n,) + c.shape[3:])

    def analyze(self, frame) -> np.ndarray:
        """Single frame (length ``n``) to a ``(9, n)`` array of subbands."""
        frame = np.asarray(frame, dtype=np.float64).reshape(-1)
        return self._analyze(frame)

    def synthesize(self, coeffs) -> np.ndarray:
        return self._synthesize(np.asarray(coeffs).reshape(N_BANDS, self.n))

    def _blocks(self, rows: int, per: int) -> int:
        if rows % per or rows // per not in (1, 3):
            raise ValueError(f"{rows} rows is not 1 or 3 blocks of {per}")
        return rows // per

    def analyze_volume(self, X) -> np.ndarray:
        """``(c*n) x J`` volume to ``(c*9n) x J`` coefficients, channel blocks kept apart."""
        X = np.asarray(getattr(X, "data", X), dtype=np.float64)
        c = self._blocks(X.shape[0], self.n)
        J = X.shape[1]
        blocks = X.reshape(c, self.n, J).transpose(1, 0, 2)       # (n, c, J)
        coef = self._analyze(blocks)                               # (9, n, c, J)
        return coef.transpose(2, 0, 1, 3).reshape(c * N_BANDS * self.n, J)

    def synthesize_volume(self, C) -> np.ndarray:
        C = np.asarray(C, dtype=np.float64)
        per = N_BANDS * self.n
        c = self._blocks(C.shape[0], per)
        J = C.shape[1]
        coef = C.reshape(c, N_BANDS, self.n, J).transpose(1, 2, 0, 3)
        return self._synthesize(coef).transpose(1, 0, 2).reshape(c * self.n, J)


def analyze(t: FrameletTransform, frame) -> np.ndarray:
    return t.analyze(frame)


def synthesize(t: FrameletTransform, coeffs) -> np.ndarray:
    return t.synthesize(coeffs)


def analyze_volume(t: FrameletTransform, X) -> np.ndarray:
    return t.analyze_volume(X)


def synthesize_volume(t: FrameletTransform, C) -> np.ndarray:
    return t.synthesize_volume(C)
