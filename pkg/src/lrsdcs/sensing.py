"""Permuted, row-subsampled Walsh-Hadamard measurement operator.

The operator is ``phi = R H P`` where ``P`` permutes the signal, ``H`` is an
orthonormal Walsh-Hadamard transform in natural (Hadamard) order and ``R``
keeps ``m`` of its rows. Rows of ``phi`` are orthonormal, so
``phi phi^T = I`` and ``phi^T phi`` is an orthogonal projector.

When ``N`` is not a power of two, ``H`` is block diagonal with one
Walsh-Hadamard block per set bit of ``N`` (largest block first). Zero
padding to the next power of two would not do: rows of a Hadamard matrix
restricted to a subset of its columns are no longer orthonormal.

Volumes are vectorized column by column (frame after frame) before
measuring, which realizes ``y = sum_j phi_j x_j``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

MAGIC = b"LRSDCS01"
_HEADER = struct.Struct("<8s7Q")


class MeasurementFileError(ValueError):
    pass


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_pow2(n: int) -> int:
    return 1 << max(0, (int(n) - 1).bit_length())


_DENSE_STAGE = 128


@lru_cache(maxsize=None)
def _sylvester(k: int) -> np.ndarray:
    """Unnormalized natural-order Hadamard matrix of order ``k``."""
    H = np.ones((1, 1))
    while H.shape[0] < k:
        H = np.block([[H, H], [H, -H]])
    H.setflags(write=False)
    return H


def fwht(v) -> np.ndarray:
    """Orthonormal fast Walsh-Hadamard transform along the last axis.

    Natural ordering, ``O(N log N)`` butterflies. The transform is symmetric
    and orthogonal, hence its own inverse.
    """
    x = np.array(v, dtype=np.float64)
    N = x.shape[-1]
    if not _is_pow2(N):
        raise ValueError(f"length {N} is not a power of two")
    lead = x.shape[:-1]
    # H_N = H_{N/k} kron H_k: the first log2(k) butterfly stages are one matmul
    k = min(N, _DENSE_STAGE)
    x = (x.reshape(lead + (N // k, k)) @ _sylvester(k)).reshape(lead + (N,))
    h = k
    while h < N:
        v = x.reshape(lead + (N // (2 * h), 2, h))
        a = v[..., 0, :].copy()
        b = v[..., 1, :]
        v[..., 0, :] += b
        np.subtract(a, b, out=b)
        h *= 2
    x *= 1.0 / np.sqrt(N)
    return x


def hadamard_blocks(n: int) -> tuple:
    """Power-of-two block sizes summing to ``n``, largest first."""
    return tuple(1 << b for b in range(int(n).bit_length() - 1, -1, -1) if n >> b & 1)


def block_fwht(v, blocks) -> np.ndarray:
    """Apply :func:`fwht` independently to consecutive segments of the given sizes."""
    v = np.asarray(v, dtype=np.float64)
    out = np.empty_like(v)
    start = 0
    for b in blocks:
        out[start:start + b] = fwht(v[start:start + b])
        start += b
    return out


@dataclass(frozen=True, eq=False)
class SensingOperator:
    signal_len: int
    padded_len: int
    m: int
    seed: int
    col_perm: np.ndarray
    row_set: np.ndarray

    @property
    def blocks(self) -> tuple:
        return hadamard_blocks(self.signal_len)

    @property
    def rate(self) -> float:
        return self.m / self.signal_len

    def dense(self) -> np.ndarray:
        """Explicit ``m x N`` matrix; only for small operators."""
        return np.stack([self.adjoint(e).ravel(order="F")
                         for e in np.eye(self.m)])

    def __eq__(self, other):
        if not isinstance(other, SensingOperator):
            return NotImplemented
        return (self.signal_len == other.signal_len and self.m == other.m
                and self.seed == other.seed
                and np.array_equal(self.col_perm, other.col_perm)
                and np.array_equal(self.row_set, other.row_set))

    # the methods below let the operator be used like a linear map
    def measure(self, X) -> np.ndarray:
        return measure(self, X)

    def adjoint(self, y, shape=None) -> np.ndarray:
        return adjoint(self, y, shape)

    def project(self, X) -> np.ndarray:
        return project(self, X)


def build_operator(signal_len: int, m: int, seed: int) -> SensingOperator:
    """Seeded operator: uniform column permutation and an independent row subset.

    The row subset always holds the first (all-ones) row of every Hadamard
    block; the remaining rows are the leading entries of a uniform
    permutation of the others.

    Both permutations are drawn with PCG64 streams spawned from
    ``SeedSequence(seed)``, so the operator depends only on
    ``(signal_len, m, seed)``. ``padded_len`` is informational: it is the
    size of the largest transform a padded implementation would need.
    """
    signal_len, m, seed = int(signal_len), int(m), int(seed)
    if not 1 <= m < signal_len:
        raise ValueError(f"need 1 <= m < N, got m={m}, N={signal_len}")
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    padded = next_pow2(signal_len)
    col_stream, row_stream = np.random.SeedSequence(seed).spawn(2)
    col_perm = np.random.Generator(np.random.PCG64(col_stream)).permutation(signal_len)
    order = np.random.Generator(np.random.PCG64(row_stream)).permutation(signal_len)
    # non-DC Walsh rows sum to zero, so without the DC rows any constant
    # volume (rank one) would lie in the null space
    dc = np.cumsum((0,) + hadamard_blocks(signal_len)[:-1])[:m]
    rest = order[~np.isin(order, dc)][:m - dc.size]
    rows = np.concatenate((dc, rest))
    col_perm.setflags(write=False)
    rows.setflags(write=False)
    return SensingOperator(signal_len, padded, m, seed, col_perm, rows)


def _vec(op: SensingOperator, X) -> np.ndarray:
    X = getattr(X, "data", X)
    X = np.asarray(X, dtype=np.float64)
    if X.size != op.signal_len:
        raise ValueError(f"signal has {X.size} entries, operator expects {op.signal_len}")
    return X.ravel(order="F")


def measure(op: SensingOperator, X) -> np.ndarray:
    """``y = phi vec(X)``, with ``vec`` stacking columns."""
    v = _vec(op, X)
    return block_fwht(v[op.col_perm], op.blocks)[op.row_set]


def adjoint(op: SensingOperator, y, shape=None) -> np.ndarray:
    """``phi^T y``, reshaped column-major to ``shape`` when given."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (op.m,):
        raise ValueError(f"expected {op.m} measurements, got shape {y.shape}")
    w = np.zeros(op.signal_len)
    w[op.row_set] = y
    v = np.empty(op.signal_len)
    v[op.col_perm] = block_fwht(w, op.blocks)
    if shape is None:
        return v
    return v.reshape(shape, order="F")


def project(op: SensingOperator, X) -> np.ndarray:
    """Orthogonal projection ``phi^T phi X`` onto the row space of ``phi``."""
    shape = np.shape(getattr(X, "data", X))
    return adjoint(op, measure(op, X), shape)


@dataclass(frozen=True)
class MeasurementFile:
    signal_len: int
    m: int
    seed: int
    width: int
    height: int
    channels: int
    frame_count: int
    y: np.ndarray


def write_measurements(path, mf: MeasurementFile) -> None:
    y = np.asarray(mf.y, dtype="<f8")
    if y.shape != (mf.m,):
        raise ValueError(f"payload has shape {y.shape}, header says {mf.m} values")
    header = _HEADER.pack(MAGIC, mf.signal_len, mf.m, mf.seed, mf.width, mf.height,
                          mf.channels, mf.frame_count)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(header + y.tobytes())
    tmp.replace(path)


def read_measurements(path) -> MeasurementFile:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise MeasurementFileError(f"{path}: truncated header")
    magic, N, m, seed, w, h, c, J = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise MeasurementFileError(f"{path}: bad magic {magic!r}")
    body = raw[_HEADER.size:]
    if len(body) != 8 * m:
        raise MeasurementFileError(
            f"{path}: expected {8 * m} payload bytes, found {len(body)}")
    if N != w * h * c * J:
        raise MeasurementFileError(f"{path}: N={N} inconsistent with {w}x{h}x{c}x{J}")
    y = np.frombuffer(body, dtype="<f8").astype(np.float64)
    return MeasurementFile(N, m, seed, w, h, c, J, y)
