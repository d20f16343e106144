"""Markov energy arrivals, battery recursion and joint-state transitions."""

from __future__ import annotations

import numpy as np

from .domain import (
    FEAS_TOL,
    Action,
    InfeasibleActionError,
    JointState,
    SystemConfig,
    battery_grid,
    battery_index,
)


def sample_next_harvest(current_idx: int, transition_matrix, rng: np.random.Generator) -> int:
    """Draw the next harvest state from row ``current_idx`` of the transition matrix.

    Uses a single uniform per call (inverse CDF), so the stream consumption
    does not depend on the matrix.
    """
    row = np.asarray(transition_matrix, dtype=float)[current_idx]
    u = rng.random()
    j = int(np.searchsorted(np.cumsum(row), u, side="right"))
    # guard against cumsum ending a hair below 1
    j = min(j, len(row) - 1)
    while row[j] == 0.0 and j > 0:
        j -= 1
    return j


def battery_update(b: float, harvest_rate: float, action: Action, b_max: float) -> float:
    """Battery at the start of the next slot: ``min(b + (1-beta) E - beta p, b_max)``.

    Raises ``InfeasibleActionError`` when the action spends more than ``b``.
    """
    consumed = action.beta * action.power
    if consumed > b + FEAS_TOL:
        raise InfeasibleActionError(
            f"consumed energy {consumed!r} exceeds battery {b!r} (beta={action.beta}, p={action.power})"
        )
    nxt = b + (1.0 - action.beta) * harvest_rate - consumed
    return min(max(nxt, 0.0), b_max)


def enumerate_transitions(
    state: JointState, action: Action, cfg: SystemConfig
) -> list[tuple[JointState, float]]:
    """Successor joint states and their probabilities, one entry per harvest state."""
    b = float(battery_grid(cfg)[state.battery_idx])
    row = cfg.transition_matrix[state.prev_harvest_idx]
    out = []
    for j, e in enumerate(cfg.harvest_rates):
        nb = battery_update(b, e, action, cfg.b_max)
        out.append((JointState(j, battery_index(cfg, nb)), row[j]))
    return out


def next_battery_indices(cfg: SystemConfig, betas: np.ndarray, powers: np.ndarray) -> np.ndarray:
    """Floor-quantized next battery index for every (battery level, action, harvest state).

    Returns an int array of shape ``(n_levels, n_actions, n_harvest)``.
    Entries for infeasible (battery, action) pairs are meaningless and must
    be masked by the caller.
    """
    levels = battery_grid(cfg)[:, None, None]
    e = np.asarray(cfg.harvest_rates, dtype=float)[None, None, :]
    beta = np.asarray(betas, dtype=float)[None, :, None]
    p = np.asarray(powers, dtype=float)[None, :, None]
    nxt = levels + (1.0 - beta) * e - beta * p
    nxt = np.minimum(np.maximum(nxt, 0.0), cfg.b_max)
    return battery_index(cfg, nxt)
