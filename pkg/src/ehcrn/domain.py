"""Shared domain types, configuration schema and validation.

All types are frozen dataclasses so they can be shared freely between
workers.  ``SystemConfig`` mirrors the on-disk TOML/JSON schema field by
field (snake_case keys).
"""

from __future__ import annotations

import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib

ROW_SUM_TOL = 1e-12
GRID_TOL = 1e-9
# consumption may exceed the battery by this much (float drift on grid arithmetic)
FEAS_TOL = 1e-9

LINKS = ("pp", "ps", "sp", "ss")


class ConfigError(ValueError):
    """A configuration violates a named invariant."""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class InfeasibleActionError(ValueError):
    """An action consumes more energy than the battery holds."""


@dataclass(frozen=True)
class SystemConfig:
    """Physical and discretization parameters of one problem instance.

    ``link_vars`` is ordered (PT-PR, PT-SR, ST-PR, ST-SR).  The PT-SR and
    ST-PR variances are used as the variances of the channel *estimates*.
    ``p_max_grid=None`` selects ``max(10 * p_th, b_max / action_step)``.
    """

    n_slots: int = 8
    p_primary: float = 2.0
    noise_var: float = 0.1
    p_th: float = 1.0
    b_max: float = 1.0
    b_init: float = 0.0
    epsilon: float = 0.05
    harvest_rates: tuple[float, ...] = (0.0, 0.5)
    transition_matrix: tuple[tuple[float, ...], ...] = ((0.5, 0.5), (0.5, 0.5))
    link_vars: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    action_step: float = 0.2
    battery_step: float = 0.02
    p_max_grid: float | None = None
    n_channel_samples: int = 1000
    rng_seed: int = 0

    def __post_init__(self):
        # normalise list-valued inputs so instances stay hashable
        object.__setattr__(self, "harvest_rates", tuple(float(e) for e in self.harvest_rates))
        object.__setattr__(
            self,
            "transition_matrix",
            tuple(tuple(float(p) for p in row) for row in self.transition_matrix),
        )
        object.__setattr__(self, "link_vars", tuple(float(v) for v in self.link_vars))

    @property
    def n_harvest_states(self) -> int:
        return len(self.harvest_rates)

    @property
    def n_battery_levels(self) -> int:
        return int(round(self.b_max / self.battery_step)) + 1

    @property
    def power_grid_max(self) -> float:
        if self.p_max_grid is not None:
            return self.p_max_grid
        return max(10.0 * self.p_th, self.b_max / self.action_step)

    @property
    def transition_array(self) -> np.ndarray:
        return np.array(self.transition_matrix, dtype=float)

    def link_var(self, link: str) -> float:
        return self.link_vars[LINKS.index(link)]

    def replace(self, **changes: Any) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["harvest_rates"] = list(self.harvest_rates)
        d["transition_matrix"] = [list(r) for r in self.transition_matrix]
        d["link_vars"] = list(self.link_vars)
        return d

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SystemConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError("schema", f"unknown keys {sorted(unknown)}")
        try:
            return cls(**dict(data))
        except (TypeError, ValueError) as exc:
            raise ConfigError("schema", str(exc)) from exc


@dataclass(frozen=True)
class ChannelRealization:
    """Link power gains and channel-estimate magnitudes for one slot."""

    g_ss_sq: float
    g_ps_hat_abs: float
    g_sp_hat_abs: float
    g_pp_sq: float = 0.0  # carried for traceability only


@dataclass(frozen=True)
class JointState:
    prev_harvest_idx: int
    battery_idx: int


@dataclass(frozen=True)
class Action:
    """Transmission fraction ``beta`` of the slot and transmit power."""

    beta: float
    power: float

    def __post_init__(self):
        if not (0.0 <= self.beta <= 1.0) or self.power < 0.0:
            raise ValueError(f"action out of range: beta={self.beta}, power={self.power}")
        if self.beta == 0.0 and self.power != 0.0:
            object.__setattr__(self, "power", 0.0)

    @property
    def energy(self) -> float:
        return self.beta * self.power


@dataclass(frozen=True)
class SlotRecord:
    slot: int
    harvest_rate: float
    action: Action
    battery_before: float
    battery_after: float
    rate: float
    harvested: float
    consumed: float
    interference: float = field(default=0.0)  # worst-case interference at PR


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Return ``cfg`` unchanged, or raise ``ConfigError`` naming the first violated invariant."""
    if not isinstance(cfg.n_slots, (int, np.integer)) or cfg.n_slots < 1:
        raise ConfigError("n_slots", f"must be a positive integer, got {cfg.n_slots!r}")
    rates = cfg.harvest_rates
    if len(rates) == 0:
        raise ConfigError("harvest_rates", "must be non-empty")
    if rates[0] != 0.0:
        raise ConfigError("harvest_rates", f"first rate must be 0, got {rates[0]}")
    if any(e < 0 or not math.isfinite(e) for e in rates):
        raise ConfigError("harvest_rates", "rates must be finite and nonnegative")
    T = cfg.transition_matrix
    if len(T) != len(rates) or any(len(row) != len(rates) for row in T):
        raise ConfigError(
            "transition_matrix", f"must be {len(rates)}x{len(rates)} to match harvest_rates"
        )
    for i, row in enumerate(T):
        if any(not (0.0 <= p <= 1.0) for p in row):
            raise ConfigError("transition_matrix", f"row {i} has entries outside [0, 1]")
        if abs(math.fsum(row) - 1.0) > ROW_SUM_TOL:
            raise ConfigError("transition_matrix", f"row {i} not stochastic (sum={math.fsum(row)!r})")
    if len(cfg.link_vars) != 4 or any(v < 0 for v in cfg.link_vars):
        raise ConfigError("link_vars", "need four nonnegative variances (pp, ps, sp, ss)")
    if not cfg.noise_var > 0:
        raise ConfigError("noise_var", "must be > 0")
    if not cfg.p_th > 0:
        raise ConfigError("p_th", "must be > 0")
    if cfg.p_primary < 0:
        raise ConfigError("p_primary", "must be >= 0")
    if not cfg.epsilon >= 0:
        raise ConfigError("epsilon", "must be >= 0")
    if cfg.b_max < 0:
        raise ConfigError("b_max", "must be >= 0")
    if not (0.0 <= cfg.b_init <= cfg.b_max):
        raise ConfigError("b_init", f"must lie in [0, b_max={cfg.b_max}]")
    if not cfg.action_step > 0:
        raise ConfigError("action_step", "must be > 0")
    if not cfg.battery_step > 0:
        raise ConfigError("battery_step", "must be > 0")
    ratio = cfg.b_max / cfg.battery_step
    if abs(ratio - round(ratio)) > GRID_TOL:
        raise ConfigError("battery_step", f"must divide b_max (b_max/step={ratio!r})")
    if cfg.p_max_grid is not None and not cfg.p_max_grid > 0:
        raise ConfigError("p_max_grid", "must be > 0")
    if not isinstance(cfg.n_channel_samples, (int, np.integer)) or cfg.n_channel_samples < 1:
        raise ConfigError("n_channel_samples", "must be a positive integer")
    if not isinstance(cfg.rng_seed, (int, np.integer)) or not (0 <= cfg.rng_seed < 2**64):
        raise ConfigError("rng_seed", "must be an integer in [0, 2**64)")
    return cfg


def battery_grid(cfg: SystemConfig) -> np.ndarray:
    """Battery levels ``0, step, 2*step, ..., b_max``."""
    n = cfg.n_battery_levels
    levels = np.arange(n, dtype=float) * cfg.battery_step
    levels[-1] = cfg.b_max
    return levels


def battery_index(cfg: SystemConfig, level):
    """Floor-quantize battery level(s) onto the grid; works on scalars and arrays."""
    idx = np.floor(np.asarray(level, dtype=float) / cfg.battery_step + GRID_TOL)
    idx = np.clip(idx, 0, cfg.n_battery_levels - 1).astype(np.int64)
    return int(idx) if idx.ndim == 0 else idx


def load_config(path: str | Path) -> SystemConfig:
    """Read a TOML or JSON config document and validate it."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("syntax", str(exc)) from exc
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("syntax", str(exc)) from exc
    if not isinstance(data, dict):
        raise ConfigError("schema", "top level must be a table/object")
    return validate_config(SystemConfig.from_dict(data))


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for stream ``key`` under master ``seed``.

    Streams in use: ``(0,)`` the channel-sample list shared by the DP
    tables, ``(1, k)`` the k-th simulation trial.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(key)))
