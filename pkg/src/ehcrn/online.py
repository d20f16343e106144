"""Robust online policy: finite-horizon stochastic DP by backward induction.

The MDP state at slot ``n`` is ``(previous harvest state, battery level)``.
The action for slot ``n`` is chosen after observing that slot's channel
estimates but before its harvest rate is known, so the current harvest is
averaged inside the transition kernel.  The expectation over channels is a
fixed list of seeded samples shared by every stage and state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import (
    ChannelBatch,
    rate_worst_case,
    sample_channel_batch,
    worst_case_gain,
)
from .domain import (
    FEAS_TOL,
    Action,
    ChannelRealization,
    JointState,
    SystemConfig,
    battery_grid,
    derive_rng,
    validate_config,
)
from .energy import next_battery_indices

TABLE_FORMAT = "ehcrn-online-tables"
TABLE_VERSION = 1

# rows of channel samples processed per vectorised block
_BLOCK = 128


class TableFormatError(ValueError):
    """A file is not a readable table artifact."""


@dataclass(frozen=True)
class ActionGrid:
    """All grid actions sorted by (beta, power); index 0 is the null action."""

    betas: np.ndarray
    powers: np.ndarray

    def __len__(self) -> int:
        return len(self.betas)

    @property
    def energy(self) -> np.ndarray:
        return self.betas * self.powers

    def action(self, k: int) -> Action:
        return Action(float(self.betas[k]), float(self.powers[k]))

    def feasible(self, battery_level, ch: ChannelRealization | ChannelBatch, cfg: SystemConfig):
        """Mask of actions satisfying the battery and worst-case interference limits."""
        g_sp = worst_case_gain(np.asarray(ch.g_sp_hat_abs, dtype=float), cfg.epsilon)
        ok_interf = g_sp[..., None] * self.powers <= cfg.p_th
        ok_batt = self.energy <= np.asarray(battery_level, dtype=float)[..., None] + FEAS_TOL
        return ok_batt & ok_interf


def _steps(upper: float, step: float) -> np.ndarray:
    k = np.arange(int(np.floor(upper / step + 1e-9)) + 1)
    return np.round(k * step, 12)


def make_action_grid(cfg: SystemConfig) -> ActionGrid:
    betas = _steps(1.0, cfg.action_step)
    powers = _steps(cfg.power_grid_max, cfg.action_step)
    bb, pp = np.meshgrid(betas[1:], powers, indexing="ij")
    return ActionGrid(
        betas=np.concatenate([[0.0], bb.ravel()]),
        powers=np.concatenate([[0.0], pp.ravel()]),
    )


def action_grid(cfg: SystemConfig, battery_level: float, ch: ChannelRealization) -> list[Action]:
    """Grid actions feasible with ``battery_level`` stored and channel ``ch``."""
    grid = make_action_grid(cfg)
    mask = grid.feasible(battery_level, ch, cfg)
    return [grid.action(k) for k in np.flatnonzero(mask)]


def dp_channel_samples(cfg: SystemConfig) -> ChannelBatch:
    """The seeded channel-sample list used for the expectation in every stage."""
    return sample_channel_batch(cfg.link_vars, derive_rng(cfg.rng_seed, 0), cfg.n_channel_samples)


@dataclass(frozen=True)
class ValueTable:
    """``values[n - 1, h, l]`` is the optimal expected reward-to-go at stage ``n``.

    The last row is the terminal stage ``N + 1`` and is identically zero.
    """

    values: np.ndarray

    @property
    def n_stages(self) -> int:
        return self.values.shape[0] - 1

    def __call__(self, stage: int, state: JointState) -> float:
        return float(self.values[stage - 1, state.prev_harvest_idx, state.battery_idx])


class OnlinePolicy:
    """Per-stage decision rules read off a value table.

    At stage ``n`` the rule maximises the observed immediate worst-case rate
    plus the expected stage ``n + 1`` value.
    """

    def __init__(self, cfg: SystemConfig, table: ValueTable):
        self.cfg = cfg
        self.table = table
        self.grid = make_action_grid(cfg)
        self._levels = battery_grid(cfg)
        self._next_idx = next_battery_indices(cfg, self.grid.betas, self.grid.powers)
        self._cont: dict[int, np.ndarray] = {}

    @property
    def n_stages(self) -> int:
        return self.table.n_stages

    def continuation(self, stage: int) -> np.ndarray:
        """Expected next-stage value, shape ``(n_harvest, n_levels, n_actions)``."""
        if stage not in self._cont:
            self._cont[stage] = _continuation(self.cfg, self.table.values[stage], self._next_idx)
        return self._cont[stage]

    def for_horizon(self, n: int) -> "OnlinePolicy":
        """Policy for a shorter horizon ``n``; tables depend only on stages to go."""
        if not 1 <= n <= self.n_stages:
            raise ValueError(f"horizon {n} outside 1..{self.n_stages}")
        sub = OnlinePolicy.__new__(OnlinePolicy)
        sub.cfg = self.cfg.replace(n_slots=n)
        sub.table = ValueTable(self.table.values[self.n_stages - n :])
        sub.grid = self.grid
        sub._levels = self._levels
        sub._next_idx = self._next_idx
        offset = self.n_stages - n
        sub._cont = {s - offset: c for s, c in self._cont.items() if s > offset}
        return sub

    def decide_index(self, stage: int, state: JointState, ch: ChannelRealization) -> int:
        level = self._levels[state.battery_idx]
        r = rate_worst_case(self.grid.betas, self.grid.powers, ch, self.cfg)
        q = r + self.continuation(stage)[state.prev_harvest_idx, state.battery_idx]
        q = np.where(self.grid.feasible(level, ch, self.cfg), q, -np.inf)
        # first maximum = smallest beta, then smallest power
        return int(np.argmax(q))


def decide(policy: OnlinePolicy, stage: int, state: JointState, ch: ChannelRealization) -> Action:
    """Online action for ``stage`` given the joint state and the observed channel."""
    if not 1 <= stage <= policy.n_stages:
        raise ValueError(f"stage {stage} outside 1..{policy.n_stages}")
    return policy.grid.action(policy.decide_index(stage, state, ch))


def _continuation(cfg: SystemConfig, v_next: np.ndarray, next_idx: np.ndarray) -> np.ndarray:
    m = cfg.n_harvest_states
    # ev[l, a, j] = V_{n+1}(j, next battery)
    ev = v_next[np.arange(m)[None, None, :], next_idx]
    return np.einsum("hj,laj->hla", cfg.transition_array, ev)


def backward_induction(
    cfg: SystemConfig, channel_samples: ChannelBatch | None = None
) -> tuple[ValueTable, OnlinePolicy]:
    """Solve the online problem for ``cfg.n_slots`` stages.

    ``channel_samples`` overrides the seeded sample list used for the
    channel expectation.
    """
    validate_config(cfg)
    if channel_samples is None:
        channel_samples = dp_channel_samples(cfg)
    grid = make_action_grid(cfg)
    levels = battery_grid(cfg)
    next_idx = next_battery_indices(cfg, grid.betas, grid.powers)
    m, n_lev, n = cfg.n_harvest_states, len(levels), cfg.n_slots

    rates = rate_worst_case(
        grid.betas[None, :], grid.powers[None, :], _column(channel_samples), cfg
    )  # (S, A)
    ok_interf = worst_case_gain(channel_samples.g_sp_hat_abs, cfg.epsilon)[:, None] * grid.powers <= cfg.p_th
    ok_batt = grid.energy[None, :] <= levels[:, None] + FEAS_TOL  # (L, A)
    n_samples = len(channel_samples)

    values = np.zeros((n + 1, m, n_lev))
    for stage in range(n, 0, -1):
        cont = _continuation(cfg, values[stage], next_idx)  # (M, L, A)
        acc = np.zeros((m, n_lev))
        for lo in range(0, n_samples, _BLOCK):
            r = rates[lo : lo + _BLOCK]
            mask = ok_batt[:, None, :] & ok_interf[None, lo : lo + _BLOCK, :]  # (L, s, A)
            for h in range(m):
                q = r[None, :, :] + cont[h][:, None, :]
                q = np.where(mask, q, -np.inf)
                acc[h] += q.max(axis=2).sum(axis=1)
        values[stage - 1] = acc / n_samples
    table = ValueTable(values)
    return table, OnlinePolicy(cfg, table)


def _column(batch: ChannelBatch) -> ChannelBatch:
    return ChannelBatch(
        g_ss_sq=batch.g_ss_sq[:, None],
        g_ps_hat_abs=batch.g_ps_hat_abs[:, None],
        g_sp_hat_abs=batch.g_sp_hat_abs[:, None],
        g_pp_sq=batch.g_pp_sq[:, None],
    )


def save_tables(table: ValueTable, cfg: SystemConfig, path: str | Path) -> None:
    """Write the value table and its config as a versioned JSON artifact.

    Only stages ``1..N`` are stored; the terminal stage is identically zero.
    """
    stages = table.values[:-1]
    doc = {
        "format": TABLE_FORMAT,
        "version": TABLE_VERSION,
        "config": cfg.to_dict(),
        "shape": list(stages.shape),
        "values": stages.tolist(),
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")


def load_tables(path: str | Path) -> tuple[ValueTable, OnlinePolicy]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise TableFormatError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != TABLE_FORMAT or doc.get("version") != TABLE_VERSION:
        raise TableFormatError(f"{path}: not a {TABLE_FORMAT} v{TABLE_VERSION} artifact")
    cfg = validate_config(SystemConfig.from_dict(doc["config"]))
    stages = np.array(doc["values"], dtype=float).reshape(doc["shape"])
    table = ValueTable(np.concatenate([stages, np.zeros((1,) + stages.shape[1:])]))
    return table, OnlinePolicy(cfg, table)

