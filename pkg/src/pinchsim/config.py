"""Experiment configuration: flat key=value files plus command-line overrides.

Every field is echoed into the output metadata so a result file is
self-describing and re-runnable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields


class ConfigError(ValueError):
    """Invalid configuration; maps to CLI exit code 2."""


#: defaults matching the reference protocol
DEFAULT_SAMPLES = 1 << 20
DEFAULT_REPEATS = 20
DEFAULT_GAMMA_LIST = (0.5, 1.0, 1.5, 2.0)
DEFAULT_R_GRID = (0.0, 3.0, 0.1)


@dataclass
class ExperimentConfig:
    task: str = ""
    state: str = "GHZ"              # GHZ | W | custom
    tensor_file: str = ""           # used when state = custom
    n: int = 3
    r: float = 0.6
    r_grid: tuple = DEFAULT_R_GRID  # (min, max, step) for scans
    gamma: float = 2.0
    gamma_list: tuple = DEFAULT_GAMMA_LIST
    theta: float = 0.0
    thetas: tuple = ()              # W phases; zeros when empty
    n_list: tuple = (2, 3, 4, 5)
    samples: int = DEFAULT_SAMPLES  # per setting
    repeats: int = DEFAULT_REPEATS
    seed: int = 20260810
    workers: int = 1
    block_size: int = 1 << 17
    output: str = ""

    def validate(self):
        if self.state not in ("GHZ", "W", "custom"):
            raise ConfigError(f"state must be GHZ, W or custom, got {self.state!r}")
        if self.state == "custom" and not self.tensor_file:
            raise ConfigError("state=custom requires tensor_file")
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.samples < 1:
            raise ConfigError(f"samples must be >= 1, got {self.samples}")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {self.repeats}")
        if self.gamma <= 0:
            raise ConfigError(f"gamma must be > 0, got {self.gamma}")
        if self.r < 0:
            raise ConfigError(f"r must be >= 0, got {self.r}")
        if len(self.r_grid) != 3 or self.r_grid[2] <= 0 or self.r_grid[1] < self.r_grid[0]:
            raise ConfigError(f"r_grid must be (min, max, step>0), got {self.r_grid}")
        if not self.gamma_list:
            raise ConfigError("gamma_list must be nonempty")
        if not self.n_list:
            raise ConfigError("n_list must be nonempty")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        return self

    def r_values(self):
        lo, hi, step = self.r_grid
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + k * step, 12) for k in range(count)]

    def metadata(self) -> dict:
        """Flat key=value view for output headers (deterministic order)."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            out[f.name] = value
        return out


_TUPLE_FLOAT_FIELDS = {"r_grid", "gamma_list", "thetas"}
_TUPLE_INT_FIELDS = {"n_list"}
_INT_FIELDS = {"n", "samples", "repeats", "seed", "workers", "block_size"}
_FLOAT_FIELDS = {"r", "gamma", "theta"}


def _parse_value(name: str, raw: str):
    raw = raw.strip()
    if name in _TUPLE_FLOAT_FIELDS:
        if ":" in raw:  # min:max:step shorthand for grids
            parts = [float(x) for x in raw.split(":")]
            return tuple(parts)
        return tuple(float(x) for x in raw.split(",") if x != "")
    if name in _TUPLE_INT_FIELDS:
        return tuple(int(x) for x in raw.split(",") if x != "")
    if name in _INT_FIELDS:
        return int(raw)
    if name in _FLOAT_FIELDS:
        return float(raw)
    return raw


def parse_config_file(path) -> dict:
    """key = value lines; '#' starts a comment; unknown keys are rejected."""
    known = {f.name for f in fields(ExperimentConfig)}
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, raw = line.split("=", 1)
            key = key.strip()
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _parse_value(key, raw)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}")
    return values


def build_config(task: str, file_values: dict, overrides: dict) -> ExperimentConfig:
    """Defaults < config file < command-line overrides."""
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    merged["task"] = task
    try:
        cfg = ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc))
    return cfg.validate()


__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "parse_config_file",
    "build_config",
    "DEFAULT_SAMPLES",
    "DEFAULT_REPEATS",
    "DEFAULT_GAMMA_LIST",
    "DEFAULT_R_GRID",
]
