"""Sweep configuration and its YAML file form."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Union

import yaml

from ..optimizers import OPTIMIZERS

DEFAULT_SHOT_GRID = tuple(10 * 4 ** k for k in range(8))


class ConfigError(ValueError):
    pass


@dataclass
class SweepConfig:
    n_list: list = field(default_factory=lambda: [4, 5, 6, 7])
    depth_rule: Union[str, int] = "n"
    optimizers: list = field(default_factory=lambda: list(OPTIMIZERS))
    shot_grid: list = field(default_factory=lambda: list(DEFAULT_SHOT_GRID))
    runs_per_cell: int = 20
    cost_threshold: float = 0.4
    budget: int = 10 ** 8
    global_seed: int = 0
    optimizer_options: dict = field(default_factory=dict)

    def __post_init__(self):
        self.n_list = [int(n) for n in self.n_list]
        self.shot_grid = [int(N) for N in self.shot_grid]
        self.optimizers = [str(o) for o in self.optimizers]
        self.validate()

    def validate(self) -> None:
        if any(n < 2 for n in self.n_list):
            raise ConfigError("every n in n_list must be >= 2")
        if len(set(self.n_list)) != len(self.n_list):
            raise ConfigError("n_list has duplicates")
        if not (self.depth_rule == "n" or (isinstance(self.depth_rule, int) and self.depth_rule >= 1)):
            raise ConfigError("depth_rule must be 'n' or a positive integer")
        unknown = set(self.optimizers) - set(OPTIMIZERS)
        if unknown:
            raise ConfigError(f"unknown optimizers: {sorted(unknown)}")
        if not self.shot_grid or self.shot_grid[0] < 1 or any(
                b <= a for a, b in zip(self.shot_grid, self.shot_grid[1:])):
            raise ConfigError("shot_grid must be strictly increasing positive integers")
        if self.runs_per_cell < 1:
            raise ConfigError("runs_per_cell must be >= 1")
        if not 0.0 < self.cost_threshold < 1.0:
            raise ConfigError("cost_threshold must lie in (0, 1)")
        if self.budget < 0:
            raise ConfigError("budget must be non-negative")
        bad = set(self.optimizer_options) - set(OPTIMIZERS)
        if bad:
            raise ConfigError(f"options given for unknown optimizers: {sorted(bad)}")

    def depth(self, n: int) -> int:
        return n if self.depth_rule == "n" else int(self.depth_rule)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc


def load_config(path: Union[str, Path]) -> SweepConfig:
    """Read a YAML mapping whose keys are the ``SweepConfig`` field names."""
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return SweepConfig.from_dict(data)


def dump_config(config: SweepConfig, path: Union[str, Path]) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(config.to_dict(), fh, sort_keys=False)
