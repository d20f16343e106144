"""Seeded Monte-Carlo evaluation of the online, offline and myopic policies.

Every trial draws one harvest sequence (Markov chain started in harvest
state 0) and one channel sequence from two child streams of the trial's
generator, then runs all requested policies on those same sequences.  Trial
``k`` of an experiment uses stream ``(1, k)`` of the master seed, so adding
trials never changes the earlier ones and sweeps over N, epsilon, P_th or
B_max share their random numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import rate_worst_case, sample_channels, worst_case_gain
from .domain import (
    Action,
    ChannelRealization,
    JointState,
    SlotRecord,
    SystemConfig,
    battery_grid,
    battery_index,
    derive_rng,
    validate_config,
)
from .energy import battery_update, sample_next_harvest
from .myopic import myopic_beta
from .offline import offline_solve
from .online import OnlinePolicy, backward_induction

POLICIES = ("online", "offline", "myopic")
INITIAL_HARVEST_STATE = 0

TRACE_METRICS = ("total_rate", "harvest_time", "transmit_time", "terminal_battery")


@dataclass(frozen=True)
class PolicyTrace:
    records: tuple[SlotRecord, ...]

    @property
    def total_rate(self) -> float:
        return math.fsum(r.rate for r in self.records)

    @property
    def harvest_time(self) -> float:
        return math.fsum(1.0 - r.action.beta for r in self.records) / len(self.records)

    @property
    def transmit_time(self) -> float:
        return math.fsum(r.action.beta for r in self.records) / len(self.records)

    @property
    def cum_harvested(self) -> np.ndarray:
        return np.cumsum([r.harvested for r in self.records])

    @property
    def cum_consumed(self) -> np.ndarray:
        return np.cumsum([r.consumed for r in self.records])

    @property
    def batteries(self) -> np.ndarray:
        return np.array([r.battery_after for r in self.records])

    @property
    def terminal_battery(self) -> float:
        return self.records[-1].battery_after


@dataclass(frozen=True)
class TrialResult:
    harvest_idx: tuple[int, ...]
    harvests: tuple[float, ...]
    channels: tuple[ChannelRealization, ...]
    traces: dict[str, PolicyTrace] = field(default_factory=dict)

    def __getitem__(self, policy: str) -> PolicyTrace:
        return self.traces[policy]


def draw_sequences(cfg: SystemConfig, rng: np.random.Generator):
    """Harvest-state indices, harvest rates and channels for ``cfg.n_slots`` slots."""
    h_rng, c_rng = rng.spawn(2)
    idx = []
    prev = INITIAL_HARVEST_STATE
    for _ in range(cfg.n_slots):
        prev = sample_next_harvest(prev, cfg.transition_matrix, h_rng)
        idx.append(prev)
    channels = tuple(sample_channels(cfg.link_vars, c_rng) for _ in range(cfg.n_slots))
    return tuple(idx), tuple(cfg.harvest_rates[j] for j in idx), channels


def _record(cfg, slot, e, action, ch, before, after) -> SlotRecord:
    return SlotRecord(
        slot=slot,
        harvest_rate=e,
        action=action,
        battery_before=before,
        battery_after=after,
        rate=float(rate_worst_case(action.beta, action.power, ch, cfg)),
        harvested=(1.0 - action.beta) * e,
        consumed=action.beta * action.power,
        interference=float(worst_case_gain(ch.g_sp_hat_abs, cfg.epsilon) * action.power),
    )


def replay(cfg: SystemConfig, actions: Sequence[Action], harvests, channels) -> PolicyTrace:
    """Apply a fixed action sequence with grid (floor) battery bookkeeping."""
    levels = battery_grid(cfg)
    b = float(levels[battery_index(cfg, cfg.b_init)])
    records = []
    for i, (a, e, ch) in enumerate(zip(actions, harvests, channels)):
        nb = float(levels[battery_index(cfg, battery_update(b, e, a, cfg.b_max))])
        records.append(_record(cfg, i + 1, e, a, ch, b, nb))
        b = nb
    return PolicyTrace(tuple(records))


def run_online(cfg: SystemConfig, policy: OnlinePolicy, harvest_idx, channels) -> PolicyTrace:
    if policy.n_stages != cfg.n_slots:
        policy = policy.for_horizon(cfg.n_slots)
    levels = battery_grid(cfg)
    l = battery_index(cfg, cfg.b_init)
    prev = INITIAL_HARVEST_STATE
    records = []
    for i, (j, ch) in enumerate(zip(harvest_idx, channels)):
        a = policy.grid.action(policy.decide_index(i + 1, JointState(prev, l), ch))
        e = cfg.harvest_rates[j]
        b = float(levels[l])
        l_next = battery_index(cfg, battery_update(b, e, a, cfg.b_max))
        records.append(_record(cfg, i + 1, e, a, ch, b, float(levels[l_next])))
        prev, l = j, l_next
    return PolicyTrace(tuple(records))


def run_myopic(cfg: SystemConfig, harvests, channels) -> PolicyTrace:
    # battery is never touched: every slot spends exactly what it harvests
    b = cfg.b_init
    records = [
        _record(cfg, i + 1, e, myopic_beta(ch, e, cfg), ch, b, b)
        for i, (e, ch) in enumerate(zip(harvests, channels))
    ]
    return PolicyTrace(tuple(records))


def run_trial(
    cfg: SystemConfig,
    policies: Sequence[str],
    rng: np.random.Generator,
    online: OnlinePolicy | None = None,
) -> TrialResult:
    """Draw one realization and evaluate ``policies`` on it."""
    unknown = set(policies) - set(POLICIES)
    if unknown:
        raise ValueError(f"unknown policies {sorted(unknown)}")
    idx, harvests, channels = draw_sequences(cfg, rng)
    traces = {}
    for name in policies:
        if name == "online":
            if online is None:
                raise ValueError("online policy tables are required")
            traces[name] = run_online(cfg, online, idx, channels)
        elif name == "offline":
            actions, _ = offline_solve(channels, harvests, cfg)
            traces[name] = replay(cfg, actions, harvests, channels)
        else:
            traces[name] = run_myopic(cfg, harvests, channels)
    return TrialResult(idx, harvests, channels, traces)


def mean_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


@dataclass
class ExperimentResult:
    cfg: SystemConfig
    policies: tuple[str, ...]
    trials: list[TrialResult]

    @property
    def n_trials(self) -> int:
        return len(self.trials)

    def samples(self, policy: str, metric: str) -> np.ndarray:
        return np.array([getattr(t[policy], metric) for t in self.trials])

    def stat(self, policy: str, metric: str) -> tuple[float, float]:
        return mean_se(self.samples(policy, metric))

    def mean(self, policy: str, metric: str = "total_rate") -> float:
        return self.stat(policy, metric)[0]

    def per_slot(self, policy: str, metric: str) -> tuple[np.ndarray, np.ndarray]:
        """Per-slot mean and standard error of an array-valued trace metric."""
        data = np.array([getattr(t[policy], metric) for t in self.trials])
        if len(data) < 2:
            return data.mean(axis=0), np.zeros(data.shape[1])
        return data.mean(axis=0), data.std(axis=0, ddof=1) / math.sqrt(len(data))

    def summary(self) -> dict[str, dict[str, tuple[float, float]]]:
        return {p: {m: self.stat(p, m) for m in TRACE_METRICS} for p in self.policies}


def run_experiment(
    cfg: SystemConfig,
    n_trials: int,
    policies: Sequence[str] = POLICIES,
    online: OnlinePolicy | None = None,
) -> ExperimentResult:
    """Run ``n_trials`` common-random-number trials; builds online tables if needed."""
    validate_config(cfg)
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if "online" in policies and online is None:
        _, online = backward_induction(cfg)
    trials = [
        run_trial(cfg, policies, derive_rng(cfg.rng_seed, 1, k), online) for k in range(n_trials)
    ]
    return ExperimentResult(cfg, tuple(policies), trials)


class InvariantViolation(AssertionError):
    """A simulated trajectory broke an energy or interference constraint."""


def check_trace(cfg: SystemConfig, trace: PolicyTrace, policy: str, tol: float = 1e-9) -> None:
    """Raise ``InvariantViolation`` unless the trajectory respects every constraint.

    Checked per slot: battery bounds, worst-case interference, the battery
    recursion and (except for the myopic policy, which spends same-slot
    energy by construction) consumption bounded by the stored battery.
    Checked per prefix: cumulative consumption bounded by initial battery
    plus cumulative harvest.
    """
    levels = battery_grid(cfg)
    harvested = cfg.b_init
    consumed = 0.0
    for r in trace.records:
        where = f"{policy} slot {r.slot}"
        if not (0.0 <= r.battery_before <= cfg.b_max and 0.0 <= r.battery_after <= cfg.b_max):
            raise InvariantViolation(f"{where}: battery outside [0, {cfg.b_max}]")
        if r.interference > cfg.p_th + tol:
            raise InvariantViolation(f"{where}: worst-case interference {r.interference} > {cfg.p_th}")
        if not (0.0 <= r.action.beta <= 1.0 and r.action.power >= 0.0):
            raise InvariantViolation(f"{where}: action out of range")
        if policy == "myopic":
            if abs(r.consumed - r.harvested) > tol or r.battery_after != r.battery_before:
                raise InvariantViolation(f"{where}: myopic slot must spend exactly its harvest")
        else:
            if r.consumed > r.battery_before + tol:
                raise InvariantViolation(f"{where}: consumed {r.consumed} > battery {r.battery_before}")
            exact = min(r.battery_before + r.harvested - r.consumed, cfg.b_max)
            if r.battery_after != levels[battery_index(cfg, max(exact, 0.0))]:
                raise InvariantViolation(f"{where}: battery recursion not satisfied")
        harvested += r.harvested
        consumed += r.consumed
        if consumed > harvested + tol:
            raise InvariantViolation(f"{where}: cumulative consumption exceeds cumulative harvest")
