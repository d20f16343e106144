"""Independent brute-force references for the DP solvers.

Nothing here touches the battery grid, the action-grid arrays or the
solvers themselves: batteries are tracked as exact floats (micro instances
use dyadic step sizes so all sums are exact), actions are enumerated with
plain loops, and constraints are checked from their definitions.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from ehcrn.domain import ChannelRealization, SystemConfig


def grid_actions(cfg: SystemConfig):
    s = cfg.action_step
    n_beta = int(round(1.0 / s))
    n_pow = int(math.floor(cfg.power_grid_max / s + 1e-9))
    out = [(0.0, 0.0)]
    for kb in range(1, n_beta + 1):
        for kp in range(n_pow + 1):
            out.append((kb * s, kp * s))
    return out


def wc_rate(beta, p, ch: ChannelRealization, cfg: SystemConfig) -> float:
    g_ps = (ch.g_ps_hat_abs + cfg.epsilon) ** 2
    return beta * math.log2(1.0 + ch.g_ss_sq * p / (cfg.noise_var + g_ps * cfg.p_primary))


def allowed(beta, p, b, ch, cfg) -> bool:
    g_sp = (ch.g_sp_hat_abs + cfg.epsilon) ** 2
    return beta * p <= b + 1e-12 and g_sp * p <= cfg.p_th


def next_battery(b, beta, p, e, cfg) -> float:
    return min(b + (1.0 - beta) * e - beta * p, cfg.b_max)


def expectimax_value(cfg: SystemConfig, samples: list[ChannelRealization]) -> float:
    """Optimal expected total over all history-dependent policies.

    Explores the full decision tree: at each slot the channel is one of
    ``samples`` (equally likely, observed before acting), the action is any
    grid action allowed by the constraints, then the harvest state is drawn
    from the row of the previous state.
    """
    acts = grid_actions(cfg)
    T = cfg.transition_matrix

    def node(slot, prev, b):
        if slot > cfg.n_slots:
            return 0.0
        total = 0.0
        for ch in samples:
            best = -math.inf
            for beta, p in acts:
                if not allowed(beta, p, b, ch, cfg):
                    continue
                v = wc_rate(beta, p, ch, cfg)
                for j, e in enumerate(cfg.harvest_rates):
                    if T[prev][j] > 0:
                        v += T[prev][j] * node(slot + 1, j, next_battery(b, beta, p, e, cfg))
                best = max(best, v)
            total += best
        return total / len(samples)

    return node(1, 0, cfg.b_init)


def enumerate_offline(cfg: SystemConfig, channels, harvests):
    """Best total worst-case rate over every grid action sequence, and one maximiser."""
    acts = grid_actions(cfg)
    best, best_seq = -math.inf, None
    for seq in itertools.product(acts, repeat=cfg.n_slots):
        b, total, ok = cfg.b_init, 0.0, True
        for (beta, p), ch, e in zip(seq, channels, harvests):
            if not allowed(beta, p, b, ch, cfg):
                ok = False
                break
            total += wc_rate(beta, p, ch, cfg)
            b = next_battery(b, beta, p, e, cfg)
        if ok and total > best:
            best, best_seq = total, seq
    return best, best_seq


def random_channel(rng) -> ChannelRealization:
    g = rng.exponential(size=4)
    return ChannelRealization(
        g_ss_sq=float(g[0] * 2.0),
        g_ps_hat_abs=float(math.sqrt(g[1])),
        g_sp_hat_abs=float(math.sqrt(g[2])),
        g_pp_sq=float(g[3]),
    )


def micro_config(rng, n_slots=None) -> SystemConfig:
    """Small dyadic instance: step 0.5, battery step 0.25, at most 6 levels."""
    b_max = float(rng.choice([0.5, 0.75, 1.0, 1.25]))
    levels = np.arange(0.0, b_max + 1e-12, 0.25)
    q = float(rng.uniform())
    return SystemConfig(
        n_slots=int(n_slots or rng.integers(1, 4)),
        p_primary=float(rng.choice([1.0, 2.0])),
        noise_var=float(rng.choice([0.1, 0.5])),
        p_th=float(rng.uniform(0.2, 2.0)),
        b_max=b_max,
        b_init=float(rng.choice(levels)),
        epsilon=float(rng.choice([0.0, 0.05, 0.1, 0.2])),
        harvest_rates=(0.0, float(rng.choice([0.5, 1.0]))),
        transition_matrix=((q, 1.0 - q), (1.0 - q, q)) if rng.uniform() < 0.5 else ((0.5, 0.5), (0.2, 0.8)),
        action_step=0.5,
        battery_step=0.25,
        p_max_grid=float(rng.choice([1.0, 1.5])),
        n_channel_samples=int(rng.integers(1, 3)),
        rng_seed=int(rng.integers(0, 2**32)),
    )
