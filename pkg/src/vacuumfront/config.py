"""Flat ``key = value`` run configuration.

Lines starting with ``#`` and blank lines are ignored; nested fields use
dotted names (``perturbation.type``).  Unknown keys are rejected so a typo
never silently falls back to a default.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Tuple

from .perturbation import KINDS, PerturbationSpec


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    gamma: float = 2.0
    mass: float = 1.0
    dim: int = 1
    grid_n: int = 200
    grid_graded: bool = False
    cfl: float = 0.4
    t_end: float = 1.0e4
    perturbation: PerturbationSpec = field(default_factory=PerturbationSpec)
    output_dir: str = "out"
    snapshot_ladder: str = "geometric"
    rate_window: Tuple[float, float] = (1.0e2, 1.0e4)
    ode_tol: float = 1.0e-10

    def validate(self) -> "RunConfig":
        if not self.gamma > 1.0:
            raise ConfigError("gamma must exceed 1")
        if not self.mass > 0.0:
            raise ConfigError("mass must be positive")
        if self.dim not in (1, 3):
            raise ConfigError("dim must be 1 or 3")
        if self.grid_n < 16:
            raise ConfigError("grid_n must be at least 16")
        if not 0.0 < self.cfl <= 0.9:
            raise ConfigError("cfl must lie in (0, 0.9]")
        if not self.t_end > 0.0:
            raise ConfigError("t_end must be positive")
        if self.snapshot_ladder not in ("geometric", "linear"):
            raise ConfigError("snapshot_ladder must be geometric or linear")
        lo, hi = self.rate_window
        if not 0.0 <= lo < hi:
            raise ConfigError("rate_window needs 0 <= t_lo < t_hi")
        if not self.ode_tol > 0.0:
            raise ConfigError("ode_tol must be positive")
        if self.dim == 3 and self.perturbation.kind == "translation":
            raise ConfigError("translation is not spherically symmetric; use dilation")
        return self


_SCALARS = {
    "gamma": float, "mass": float, "dim": int, "grid_n": int, "cfl": float,
    "t_end": float, "output_dir": str, "snapshot_ladder": str, "ode_tol": float,
}
_PERT = {"epsilon": float, "v0": float, "x_c": float, "sigma": float}


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text: str) -> RunConfig:
    values: Dict[str, object] = {}
    pert: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        try:
            if key in _SCALARS:
                values[key] = _SCALARS[key](val)
            elif key == "grid_graded":
                values[key] = _bool(val)
            elif key == "rate_window":
                lo, hi = (float(v) for v in val.replace(",", " ").split())
                values[key] = (lo, hi)
            elif key == "perturbation.type":
                if val not in KINDS or val == "custom":
                    raise ValueError(f"unsupported perturbation type {val!r}")
                pert["kind"] = val
            elif key.startswith("perturbation.") and key[13:] in _PERT:
                pert[key[13:]] = float(val)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    for k in ("dim", "grid_n"):
        if k in values and isinstance(values[k], float):
            values[k] = int(values[k])
    try:
        values["perturbation"] = PerturbationSpec(**pert)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg = RunConfig(**values)
    if math.isnan(cfg.gamma) or math.isnan(cfg.t_end):
        raise ConfigError("NaN in configuration")
    return cfg.validate()


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    return replace(cfg, **kw).validate()
