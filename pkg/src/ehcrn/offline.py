"""Robust offline benchmark with every channel and harvest known in advance.

Solved exactly on the shared action/battery grid by deterministic backward
DP over (slot, battery level).  Among equally good actions the one leading
to the smallest terminal battery is kept, then the smallest (beta, power).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .channel import rate_worst_case, worst_case_gain
from .domain import FEAS_TOL, Action, ChannelRealization, SystemConfig, battery_grid, battery_index
from .energy import battery_update
from .online import make_action_grid

# relative slack under which two objective values count as tied
TIE_TOL = 1e-12


def offline_solve(
    channels: Sequence[ChannelRealization], harvests: Sequence[float], cfg: SystemConfig
) -> tuple[list[Action], float]:
    """Hindsight-optimal grid actions and their total worst-case throughput."""
    n = cfg.n_slots
    if len(channels) != n or len(harvests) != n:
        raise ValueError(
            f"need {n} channels and harvests, got {len(channels)} and {len(harvests)}"
        )
    grid = make_action_grid(cfg)
    levels = battery_grid(cfg)
    ok_batt = grid.energy[None, :] <= levels[:, None] + FEAS_TOL  # (L, A)

    value = np.zeros(len(levels))
    terminal = levels.copy()  # terminal battery reached from each level
    choice = np.zeros((n, len(levels)), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        ch, e = channels[i], float(harvests[i])
        r = rate_worst_case(grid.betas, grid.powers, ch, cfg)
        ok = ok_batt & (worst_case_gain(ch.g_sp_hat_abs, cfg.epsilon) * grid.powers <= cfg.p_th)
        nxt = levels[:, None] + (1.0 - grid.betas) * e - grid.energy
        nxt_idx = battery_index(cfg, np.minimum(np.maximum(nxt, 0.0), cfg.b_max))
        q = np.where(ok, r[None, :] + value[nxt_idx], -np.inf)
        best = q.max(axis=1)
        tied = q >= best[:, None] - TIE_TOL * (1.0 + np.abs(best[:, None]))
        k = np.argmin(np.where(tied, terminal[nxt_idx], np.inf), axis=1)
        rows = np.arange(len(levels))
        choice[i] = k
        value = q[rows, k]
        terminal = terminal[nxt_idx[rows, k]]

    actions = []
    total = 0.0
    b = levels[battery_index(cfg, cfg.b_init)]
    for i in range(n):
        a = grid.action(choice[i, battery_index(cfg, b)])
        actions.append(a)
        total += float(rate_worst_case(a.beta, a.power, channels[i], cfg))
        b = levels[battery_index(cfg, battery_update(b, float(harvests[i]), a, cfg.b_max))]
    return actions, total
