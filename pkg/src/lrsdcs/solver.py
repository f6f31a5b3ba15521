"""Augmented-Lagrangian alternating direction solver for low-rank + sparse
reconstruction from compressive measurements.

Solves::

    min  mu1 ||X1||_* + mu2 ||W1 X1||_1 + mu3 ||W2 X2||_1
    s.t. phi(X1 + X2) = y

by splitting ``Z1 = X1``, ``Z2 = W1 X1``, ``Z3 = W2 X2``. The joint color
model replaces the two l1 terms by l2,1 norms over the R, G, B coefficient
blocks and uses group shrinkage in the Z-updates.

Each iteration does an (X1, X2) update, then the three Z proxes, then the
four multiplier steps. The (X1, X2) update is exact: because the framelets
are tight (``W^T W = I``) and the rows of ``phi`` are orthonormal
(``phi phi^T = I``), the normal equations decouple after projecting onto
the row space of ``phi``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import prox
from .framelet import FrameletTransform
from .sensing import SensingOperator
from .volume import FrameGeometry, VideoVolume

log = logging.getLogger(__name__)

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    def __init__(self, iteration: int, what: str = "non-finite iterate"):
        super().__init__(f"{what} at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class SolverConfig:
    """Model weights, penalties and stopping rules.

    Penalties left as ``None`` are set from the data by :meth:`resolved`:
    ``beta_scale / mean(|y|)``.

    The nuclear norm of a volume grows like ``sqrt(N)`` while the l1 terms
    grow like ``N``, so a given ``mu2, mu3`` balances the two differently on
    volumes of different size. When ``mu_reference_size`` is set, ``mu2`` and
    ``mu3`` are read as weights for a volume of that many entries and are
    multiplied by ``sqrt(mu_reference_size / N)`` for the volume at hand.
    """

    mu1: float = 1.0
    mu2: float = 0.0
    mu3: float = 1e-3
    beta1: Optional[float] = None
    beta2: Optional[float] = None
    beta3: Optional[float] = None
    beta4: Optional[float] = None
    beta_scale: float = 0.01
    mu_reference_size: Optional[int] = None
    gamma: float = 1.6
    max_iter: int = 300
    tol_rel_change: float = 1e-4
    tol_feas: float = 1e-3
    x_update: str = "exact"
    check_stationarity: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("mu1", "mu2", "mu3"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be finite and nonnegative, got {v}")
        for name in ("beta1", "beta2", "beta3", "beta4"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be positive, got {v}")
        if self.mu_reference_size is not None and not self.mu_reference_size >= 1:
            raise ConfigError(f"mu_reference_size must be positive, got {self.mu_reference_size}")
        if not (self.beta_scale > 0 and math.isfinite(self.beta_scale)):
            raise ConfigError(f"beta_scale must be positive, got {self.beta_scale}")
        if not 0 < self.gamma < GOLDEN:
            raise ConfigError(f"gamma must lie in (0, {GOLDEN:.6f}), got {self.gamma}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigError(f"max_iter must be a positive integer, got {self.max_iter}")
        if not (self.tol_rel_change >= 0 and self.tol_feas >= 0):
            raise ConfigError("tolerances must be nonnegative")
        if self.x_update not in ("exact", "steepest"):
            raise ConfigError(f"x_update must be 'exact' or 'steepest', got {self.x_update!r}")

    @property
    def betas(self) -> tuple:
        b = (self.beta1, self.beta2, self.beta3, self.beta4)
        if any(v is None for v in b):
            raise ConfigError("penalties are unresolved; call resolved(y) first")
        return b

    def resolved(self, y, signal_len: Optional[int] = None) -> "SolverConfig":
        """Copy with unset penalties filled from the measurement scale and, if a
        reference size is set, the sparsity weights rescaled to ``signal_len``."""
        scale = float(np.mean(np.abs(y))) if np.size(y) else 0.0
        base = self.beta_scale / scale if scale > 0 else self.beta_scale
        fill = {k: base for k in ("beta1", "beta2", "beta3", "beta4")
                if getattr(self, k) is None}
        if self.mu_reference_size is not None and signal_len:
            f = math.sqrt(self.mu_reference_size / signal_len)
            fill.update(mu2=self.mu2 * f, mu3=self.mu3 * f, mu_reference_size=None)
        return replace(self, **fill)


@dataclass
class SolverState:
    X1: np.ndarray
    X2: np.ndarray
    Z1: np.ndarray
    Z2: np.ndarray
    Z3: np.ndarray
    lam1: np.ndarray
    lam2: np.ndarray
    lam3: np.ndarray
    lam4: np.ndarray

    @classmethod
    def zeros(cls, rows: int, J: int, coef_rows: int, m: int) -> "SolverState":
        z = lambda *s: np.zeros(s)
        return cls(z(rows, J), z(rows, J), z(rows, J), z(coef_rows, J), z(coef_rows, J),
                   z(rows, J), z(coef_rows, J), z(coef_rows, J), z(m))

    def finite(self) -> bool:
        return all(np.all(np.isfinite(getattr(self, k))) for k in self.__dataclass_fields__)


@dataclass
class Decomposition:
    geometry: FrameGeometry
    X1: np.ndarray
    X2: np.ndarray
    iterations: int
    converged: bool
    objective_history: list = field(default_factory=list)
    feas_history: list = field(default_factory=list)
    change_history: list = field(default_factory=list)
    numerical_rank_X1: int = 0

    @property
    def background(self) -> VideoVolume:
        return VideoVolume(self.geometry, self.X1)

    @property
    def foreground(self) -> VideoVolume:
        return VideoVolume(self.geometry, self.X2)

    @property
    def video(self) -> VideoVolume:
        return VideoVolume(self.geometry, self.X1 + self.X2)

    @property
    def final_feasibility(self) -> float:
        return self.feas_history[-1] if self.feas_history else float("nan")

    @property
    def final_objective(self) -> float:
        return self.objective_history[-1] if self.objective_history else float("nan")


def _rhs(state, config, op, W1, W2, y):
    b1, b2, b3, b4 = config.betas
    shape = state.X1.shape
    data = op.adjoint(state.lam4 + b4 * y, shape)
    R1 = state.lam1 + b1 * state.Z1 + W1.synthesize_volume(state.lam2 + b2 * state.Z2) + data
    R2 = W2.synthesize_volume(state.lam3 + b3 * state.Z3) + data
    return R1, R2


def stationarity_residual(X1, X2, state, config, op, W1, W2, y) -> float:
    """Frobenius norm of the gradient of the augmented Lagrangian in (X1, X2)."""
    b1, b2, b3, b4 = config.betas
    R1, R2 = _rhs(state, config, op, W1, W2, y)
    PX = op.project(X1 + X2)
    g1 = (b1 + b2) * X1 + b4 * PX - R1
    g2 = b3 * X2 + b4 * PX - R2
    return float(math.hypot(np.linalg.norm(g1), np.linalg.norm(g2)))


def solve_x_subproblem(state: SolverState, config: SolverConfig, op: SensingOperator,
                       W1: FrameletTransform, W2: FrameletTransform, y) -> tuple:
    """Exact minimizer of the augmented Lagrangian over (X1, X2).

    With ``a = b1 + b2``, ``b = b3`` and ``P = phi^T phi`` the stationarity
    conditions are ``a X1 + b4 P(X1 + X2) = R1`` and
    ``b X2 + b4 P(X1 + X2) = R2``. Projecting their sum by ``P`` gives
    ``S = P(X1 + X2) = P(R1/a + R2/b) / (1 + b4 (1/a + 1/b))``.
    """
    b1, b2, b3, b4 = config.betas
    a, b = b1 + b2, b3
    R1, R2 = _rhs(state, config, op, W1, W2, y)
    S = op.project(R1 / a + R2 / b) / (1.0 + b4 * (1.0 / a + 1.0 / b))
    return (R1 - b4 * S) / a, (R2 - b4 * S) / b


def steepest_x_step(state: SolverState, config: SolverConfig, op: SensingOperator,
                    W1: FrameletTransform, W2: FrameletTransform, y) -> tuple:
    """One exact-line-search steepest descent step on the (X1, X2) subproblem,
    started from the current iterate."""
    b1, b2, b3, b4 = config.betas
    a, b = b1 + b2, b3
    X1, X2 = state.X1, state.X2
    R1, R2 = _rhs(state, config, op, W1, W2, y)
    PX = op.project(X1 + X2)
    g1 = a * X1 + b4 * PX - R1
    g2 = b * X2 + b4 * PX - R2
    gg = float(np.vdot(g1, g1) + np.vdot(g2, g2))
    if gg == 0.0:
        return X1.copy(), X2.copy()
    pg = op.measure(g1 + g2)
    curv = a * float(np.vdot(g1, g1)) + b * float(np.vdot(g2, g2)) + b4 * float(pg @ pg)
    t = gg / curv
    return X1 - t * g1, X2 - t * g2


def update_z(state: SolverState, config: SolverConfig, W1: FrameletTransform,
             W2: FrameletTransform, joint: bool = False, coeffs=None) -> tuple:
    """Closed-form Z proxes. ``coeffs`` may carry precomputed ``(W1 X1, W2 X2)``."""
    b1, b2, b3, _ = config.betas
    WX1, WX2 = coeffs or (W1.analyze_volume(state.X1), W2.analyze_volume(state.X2))
    shrink = prox.group_shrink if joint else prox.scalar_shrink
    Z1 = prox.svt(state.X1 - state.lam1 / b1, config.mu1 / b1)
    Z2 = shrink(WX1 - state.lam2 / b2, config.mu2 / b2)
    Z3 = shrink(WX2 - state.lam3 / b3, config.mu3 / b3)
    return Z1, Z2, Z3


def update_multipliers(state: SolverState, config: SolverConfig, op: SensingOperator,
                       W1: FrameletTransform, W2: FrameletTransform, y,
                       coeffs=None, measured=None) -> tuple:
    """Multiplier steps of length ``gamma * beta_i`` against each constraint residual."""
    b1, b2, b3, b4 = config.betas
    g = config.gamma
    WX1, WX2 = coeffs or (W1.analyze_volume(state.X1), W2.analyze_volume(state.X2))
    if measured is None:
        measured = op.measure(state.X1 + state.X2)
    lam1 = state.lam1 - g * b1 * (state.X1 - state.Z1)
    lam2 = state.lam2 - g * b2 * (WX1 - state.Z2)
    lam3 = state.lam3 - g * b3 * (WX2 - state.Z3)
    lam4 = state.lam4 - g * b4 * (measured - y)
    return lam1, lam2, lam3, lam4


def objective(X1, X2, W1: FrameletTransform, W2: FrameletTransform,
              config: SolverConfig, joint: bool = False, coeffs=None) -> float:
    """Model objective; l1 terms for grayscale, l2,1 terms for the joint color model."""
    norm = prox.l21_norm if joint else (lambda C: float(np.abs(C).sum()))
    WX1, WX2 = coeffs or (None, None)
    val = config.mu1 * prox.nuclear_norm(X1)
    if config.mu2:
        val += config.mu2 * norm(W1.analyze_volume(X1) if WX1 is None else WX1)
    if config.mu3:
        val += config.mu3 * norm(W2.analyze_volume(X2) if WX2 is None else WX2)
    return float(val)


def _run(y, op, W1, W2, geometry, config, joint) -> Decomposition:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (op.m,):
        raise ValueError(f"expected {op.m} measurements, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("measurements contain non-finite values")
    rows = geometry.rows
    if op.signal_len % rows:
        raise ValueError(f"operator size {op.signal_len} is not a multiple of {rows} rows")
    J = op.signal_len // rows
    cfg = config.resolved(y, op.signal_len)
    log.debug("penalties %s, weights %s", cfg.betas, (cfg.mu1, cfg.mu2, cfg.mu3))
    state = SolverState.zeros(rows, J, 9 * rows, op.m)
    ynorm = float(np.linalg.norm(y))
    dec = Decomposition(geometry, state.X1, state.X2, 0, False)
    x_update = solve_x_subproblem if cfg.x_update == "exact" else steepest_x_step

    for k in range(1, cfg.max_iter + 1):
        X1_old, X2_old = state.X1, state.X2
        state.X1, state.X2 = x_update(state, cfg, op, W1, W2, y)
        if not (np.all(np.isfinite(state.X1)) and np.all(np.isfinite(state.X2))):
            raise NumericalFailure(k)
        if cfg.check_stationarity and cfg.x_update == "exact":
            R1, R2 = _rhs(state, cfg, op, W1, W2, y)
            res = stationarity_residual(state.X1, state.X2, state, cfg, op, W1, W2, y)
            bound = 1e-9 * (1 + np.linalg.norm(R1) + np.linalg.norm(R2))
            if res > bound:
                raise NumericalFailure(k, f"X-subproblem residual {res:.3e} > {bound:.3e}")
        coeffs = (W1.analyze_volume(state.X1), W2.analyze_volume(state.X2))
        measured = op.measure(state.X1 + state.X2)
        state.Z1, state.Z2, state.Z3 = update_z(state, cfg, W1, W2, joint, coeffs)
        state.lam1, state.lam2, state.lam3, state.lam4 = update_multipliers(
            state, cfg, op, W1, W2, y, coeffs, measured)
        if not state.finite():
            raise NumericalFailure(k)

        num = math.hypot(np.linalg.norm(state.X1 - X1_old), np.linalg.norm(state.X2 - X2_old))
        den = math.hypot(np.linalg.norm(X1_old), np.linalg.norm(X2_old))
        change = num / den if den > 0 else (0.0 if num == 0 else float("inf"))
        r = float(np.linalg.norm(measured - y))
        feas = r / ynorm if ynorm > 0 else r
        dec.change_history.append(change)
        dec.feas_history.append(feas)
        dec.objective_history.append(objective(state.X1, state.X2, W1, W2, cfg, joint, coeffs))
        dec.iterations = k
        if change <= cfg.tol_rel_change and feas <= cfg.tol_feas:
            dec.converged = True
            break

    if not dec.converged:
        log.warning("no convergence after %d iterations (feasibility %.3e)",
                    dec.iterations, dec.feas_history[-1])
    dec.X1, dec.X2 = state.X1, state.X2
    dec.numerical_rank_X1 = prox.numerical_rank(state.X1) if state.X1.size else 0
    return dec


def reconstruct(y, op: SensingOperator, W1: FrameletTransform, W2: FrameletTransform,
                geometry: FrameGeometry, config: SolverConfig = SolverConfig()) -> Decomposition:
    """Grayscale low-rank + sparse reconstruction, starting from all-zero iterates."""
    if geometry.channels != 1:
        raise ConfigError("reconstruct expects a single-channel geometry; use reconstruct_color")
    return _run(y, op, W1, W2, geometry, config, joint=False)


def reconstruct_color(y, op: SensingOperator, W1: FrameletTransform, W2: FrameletTransform,
                      geometry: FrameGeometry, config: SolverConfig = SolverConfig()) -> Decomposition:
    """Joint color reconstruction: nuclear norm on the stacked ``3n x J`` background,
    l2,1 norms and group shrinkage on the framelet coefficients."""
    if geometry.channels != 3:
        raise ConfigError("reconstruct_color expects a 3-channel geometry")
    return _run(y, op, W1, W2, geometry, config, joint=True)
