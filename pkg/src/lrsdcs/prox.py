"""Spectral and proximal operators used by the decomposition solver."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

# singular values at or below this fraction of the largest are treated as zero
ZERO_SIGMA_RTOL = 1e-12


class ThinSvd(NamedTuple):
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.V.T


def _check_finite(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if not np.all(np.isfinite(A)):
        raise ValueError("input contains non-finite entries")
    return A


def _check_tau(tau: float) -> float:
    if not tau >= 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    return float(tau)


def _channel_blocks(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] % 3:
        raise ValueError(f"row count {X.shape[0]} is not divisible by 3")
    return X.reshape((3, X.shape[0] // 3) + X.shape[1:])


def thin_svd(A) -> ThinSvd:
    """Economy SVD ``A = U diag(sigma) V^T`` with ``r = min(n, J)`` columns."""
    A = _check_finite(A)
    if A.ndim != 2 or min(A.shape) < 1:
        raise ValueError(f"expected a nonempty matrix, got shape {A.shape}")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    return ThinSvd(U, s, Vt.T)


def svt(A, tau: float) -> np.ndarray:
    r"""Singular value thresholding.

    Returns the minimizer of ``tau * ||Z||_* + 0.5 * ||Z - A||_F^2``, i.e.
    ``U diag(max(sigma - tau, 0)) V^T``.
    """
    tau = _check_tau(tau)
    A = _check_finite(A)
    if tau == 0:
        return A.copy()
    U, s, V = thin_svd(A)
    keep = (s > tau) & (s > ZERO_SIGMA_RTOL * (s[0] if s.size else 0.0))
    if not keep.any():
        return np.zeros_like(A)
    return (U[:, keep] * (s[keep] - tau)) @ V[:, keep].T


def scalar_shrink(x, tau: float) -> np.ndarray:
    """Soft thresholding ``sgn(x) * max(|x| - tau, 0)``."""
    tau = _check_tau(tau)
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def group_shrink(X, tau: float) -> np.ndarray:
    """Pixel-wise shrinkage of the 3-vectors formed across the channel row blocks.

    Each 3-vector ``x`` becomes ``max(||x|| - tau, 0) * x / ||x||``; zero stays zero.
    """
    tau = _check_tau(tau)
    B = _channel_blocks(X)
    norm = np.sqrt(np.sum(B * B, axis=0))
    scale = np.zeros_like(norm)
    nz = norm > 0
    scale[nz] = np.maximum(norm[nz] - tau, 0.0) / norm[nz]
    return (B * scale).reshape(np.shape(X))


def nuclear_norm(A) -> float:
    A = _check_finite(A)
    return float(np.sum(np.linalg.svd(A, compute_uv=False)))


def l21_norm(X) -> float:
    B = _channel_blocks(X)
    return float(np.sum(np.sqrt(np.sum(B * B, axis=0))))


def numerical_rank(A, rtol: float = 1e-3) -> int:
    """Count of singular values above ``rtol * sigma_max``."""
    s = np.linalg.svd(_check_finite(A), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))
