"""Run configuration: flat ``key = value`` files plus command-line overrides."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .solver import SolverConfig


class ConfigFileError(ValueError):
    pass


def _opt_float(s: str) -> Optional[float]:
    return None if s.lower() in ("", "none", "auto") else float(s)


def _opt_int(s: str) -> Optional[int]:
    return None if s.lower() in ("", "none", "auto") else int(float(s))


# key -> (RunConfig or SolverConfig field, parser)
KEYS = {
    "mode": ("mode", str),
    "rate": ("measurement_rate", float),
    "seed": ("seed", int),
    "delta": ("delta", _opt_float),
    "window": ("window", int),
    "mu1": ("solver.mu1", float),
    "mu2": ("solver.mu2", float),
    "mu3": ("solver.mu3", float),
    "mu_reference_size": ("solver.mu_reference_size", _opt_int),
    "beta": ("beta", _opt_float),
    "beta1": ("solver.beta1", _opt_float),
    "beta2": ("solver.beta2", _opt_float),
    "beta3": ("solver.beta3", _opt_float),
    "beta4": ("solver.beta4", _opt_float),
    "beta_scale": ("solver.beta_scale", float),
    "gamma": ("solver.gamma", float),
    "max_iter": ("solver.max_iter", int),
    "tol_feas": ("solver.tol_feas", float),
    "tol_change": ("solver.tol_rel_change", float),
    "x_update": ("solver.x_update", str),
}


@dataclass(frozen=True)
class RunConfig:
    mode: str = "grayscale"
    measurement_rate: float = 0.2
    seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    delta: Optional[float] = None
    window: int = 3

    def __post_init__(self):
        if self.mode not in ("grayscale", "color"):
            raise ValueError(f"mode must be 'grayscale' or 'color', got {self.mode!r}")
        if not 0 < self.measurement_rate < 1:
            raise ValueError(f"measurement rate must lie in (0, 1), got {self.measurement_rate}")
        if self.delta is not None and not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be a positive odd integer, got {self.window}")

    def updated(self, values: dict) -> "RunConfig":
        """Apply ``{key: parsed value}`` overrides using the names in :data:`KEYS`."""
        top, solver = {}, {}
        for key, val in values.items():
            if val is None and key not in ("delta", "mu_reference_size"):
                continue
            target = KEYS[key][0]
            if key == "beta":
                solver.update(beta1=val, beta2=val, beta3=val, beta4=val)
            elif target.startswith("solver."):
                solver[target[7:]] = val
            else:
                top[target] = val
        return replace(self, solver=replace(self.solver, **solver), **top)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigFileError(f"{source}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigFileError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            values[key] = KEYS[key][1](val)
        except ValueError as e:
            raise ConfigFileError(f"{source}:{lineno}: bad value for {key}: {e}") from None
    return values


def load_config(path) -> dict:
    p = Path(path)
    return parse_config_text(p.read_text(), str(p))
