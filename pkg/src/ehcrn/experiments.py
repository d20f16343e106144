"""Experiment presets: parameter sweeps that regenerate the figure data as tables.

Each preset returns a header and rows of numbers.  Sweeps share random
numbers across sweep points (same trial streams), and the online tables for
one parameter point are built once at the longest horizon and sliced for
shorter ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domain import SystemConfig, validate_config
from .online import OnlinePolicy, backward_induction
from .simulator import check_trace, run_experiment

HORIZONS = tuple(range(1, 11))
EPSILONS = (0.0, 0.05, 0.1, 0.2)
P_THRESHOLDS = tuple(float(x) for x in np.round(np.arange(1, 11) * 0.2, 10))
B_MAXES = (0.2, 0.5, 1.0, 2.0)
CHANNEL_CONDITIONS = {
    "weak-ps": (1.0, 0.1, 1.0, 1.0),
    "weak-sp": (1.0, 1.0, 0.1, 1.0),
    "weak-ss": (1.0, 1.0, 1.0, 0.1),
    "all-equal": (1.0, 1.0, 1.0, 1.0),
}
FIGURE_EPSILON = 0.05


@dataclass
class Table:
    header: list[str]
    rows: list[list] = field(default_factory=list)
    notes: dict = field(default_factory=dict)


class TableCache:
    """Online tables keyed by config (with ``n_slots`` normalised)."""

    def __init__(self, preloaded: OnlinePolicy | None = None):
        self._store: dict[SystemConfig, OnlinePolicy] = {}
        if preloaded is not None:
            self._store[preloaded.cfg.replace(n_slots=1)] = preloaded

    def get(self, cfg: SystemConfig) -> OnlinePolicy:
        key = cfg.replace(n_slots=1)
        pol = self._store.get(key)
        if pol is None or pol.n_stages < cfg.n_slots:
            _, pol = backward_induction(cfg)
            self._store[key] = pol
        return pol.for_horizon(cfg.n_slots) if pol.n_stages != cfg.n_slots else pol


def _experiment(cfg, trials, policies, cache: TableCache, check: bool):
    online = cache.get(cfg) if "online" in policies else None
    ex = run_experiment(cfg, trials, policies, online=online)
    if check:
        for t in ex.trials:
            for p in policies:
                check_trace(cfg, t[p], p)
    return ex


def _horizon_sweep(base, values, field_name, trials, cache, check, label=None):
    label = label or field_name
    table = Table([label, "n_slots", "online_mean", "online_se"])
    for v in values:
        cfg = base.replace(**{field_name: v}, n_slots=max(HORIZONS))
        cache.get(cfg)
        for n in HORIZONS:
            ex = _experiment(cfg.replace(n_slots=n), trials, ("online",), cache, check)
            table.rows.append([v, n, *ex.stat("online", "total_rate")])
    return table


def fig3_eps_sweep(base, trials, cache, check=True) -> Table:
    return _horizon_sweep(base, EPSILONS, "epsilon", trials, cache, check)


def fig4_channel_presets(base, trials, cache, check=True) -> Table:
    base = base.replace(epsilon=FIGURE_EPSILON)
    table = Table(["condition", "n_slots", "online_mean", "online_se"])
    for name, link_vars in CHANNEL_CONDITIONS.items():
        cfg = base.replace(link_vars=link_vars, n_slots=max(HORIZONS))
        for n in HORIZONS:
            ex = _experiment(cfg.replace(n_slots=n), trials, ("online",), cache, check)
            table.rows.append([name, n, *ex.stat("online", "total_rate")])
    table.notes["conditions"] = {k: list(v) for k, v in CHANNEL_CONDITIONS.items()}
    return table


def fig5_pth_sweep(base, trials, cache, check=True) -> Table:
    base = base.replace(epsilon=FIGURE_EPSILON, n_slots=8)
    table = Table(
        [
            "p_th",
            "harvest_time_mean",
            "harvest_time_se",
            "transmit_time_mean",
            "transmit_time_se",
            "online_mean",
            "online_se",
        ]
    )
    for p_th in P_THRESHOLDS:
        ex = _experiment(base.replace(p_th=p_th), trials, ("online",), cache, check)
        table.rows.append(
            [
                p_th,
                *ex.stat("online", "harvest_time"),
                *ex.stat("online", "transmit_time"),
                *ex.stat("online", "total_rate"),
            ]
        )
    return table


def fig6_bmax_sweep(base, trials, cache, check=True) -> Table:
    base = base.replace(epsilon=FIGURE_EPSILON)
    return _horizon_sweep(base, B_MAXES, "b_max", trials, cache, check)


def fig7_energy_trajectory(base, trials, cache, check=True) -> Table:
    cfg = base.replace(epsilon=FIGURE_EPSILON, n_slots=7)
    ex = _experiment(cfg, trials, ("online",), cache, check)
    h, h_se = ex.per_slot("online", "cum_harvested")
    c, c_se = ex.per_slot("online", "cum_consumed")
    b, b_se = ex.per_slot("online", "batteries")
    table = Table(
        [
            "slot",
            "cum_harvested_mean",
            "cum_harvested_se",
            "cum_consumed_mean",
            "cum_consumed_se",
            "battery_mean",
            "battery_se",
        ]
    )
    for i in range(cfg.n_slots):
        table.rows.append([i + 1, h[i], h_se[i], c[i], c_se[i], b[i], b_se[i]])
    return table


def fig8_policy_comparison(base, trials, cache, check=True) -> Table:
    cfg = base.replace(epsilon=FIGURE_EPSILON, n_slots=max(HORIZONS))
    policies = ("online", "offline", "myopic")
    header = ["n_slots"]
    for p in policies:
        header += [f"{p}_mean", f"{p}_se"]
    table = Table(header)
    for n in HORIZONS:
        ex = _experiment(cfg.replace(n_slots=n), trials, policies, cache, check)
        row = [n]
        for p in policies:
            row += list(ex.stat(p, "total_rate"))
        table.rows.append(row)
    return table


PRESETS: dict[str, Callable[..., Table]] = {
    "fig3-eps-sweep": fig3_eps_sweep,
    "fig4-channel-presets": fig4_channel_presets,
    "fig5-pth-sweep": fig5_pth_sweep,
    "fig6-bmax-sweep": fig6_bmax_sweep,
    "fig7-energy-trajectory": fig7_energy_trajectory,
    "fig8-policy-comparison": fig8_policy_comparison,
}


def run_preset(name: str, base: SystemConfig, trials: int, cache: TableCache | None = None) -> Table:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    validate_config(base)
    return PRESETS[name](base, trials, cache or TableCache())
