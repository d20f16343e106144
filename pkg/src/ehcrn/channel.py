"""Rayleigh channel sampling, worst-case gain inflation and rate functions.

Every link gain of a zero-mean complex Gaussian coefficient with variance
``s2`` has power ``|g|^2 ~ s2 * Exp(1)``.  Samples are drawn as unit
exponentials and scaled afterwards, so two configs that differ only in
``link_vars`` see coupled (common-random-number) realizations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .domain import ChannelRealization, SystemConfig

# draw order of the four unit exponentials per slot
_DRAW_ORDER = ("pp", "ps", "sp", "ss")


@dataclass(frozen=True)
class ChannelBatch:
    """Struct-of-arrays view of several channel realizations."""

    g_ss_sq: np.ndarray
    g_ps_hat_abs: np.ndarray
    g_sp_hat_abs: np.ndarray
    g_pp_sq: np.ndarray

    def __len__(self) -> int:
        return len(self.g_ss_sq)

    def __getitem__(self, k: int) -> ChannelRealization:
        return ChannelRealization(
            g_ss_sq=float(self.g_ss_sq[k]),
            g_ps_hat_abs=float(self.g_ps_hat_abs[k]),
            g_sp_hat_abs=float(self.g_sp_hat_abs[k]),
            g_pp_sq=float(self.g_pp_sq[k]),
        )

    def __iter__(self):
        return (self[k] for k in range(len(self)))

    @classmethod
    def from_realizations(cls, chs: Iterable[ChannelRealization]) -> "ChannelBatch":
        chs = list(chs)
        return cls(
            g_ss_sq=np.array([c.g_ss_sq for c in chs], dtype=float),
            g_ps_hat_abs=np.array([c.g_ps_hat_abs for c in chs], dtype=float),
            g_sp_hat_abs=np.array([c.g_sp_hat_abs for c in chs], dtype=float),
            g_pp_sq=np.array([c.g_pp_sq for c in chs], dtype=float),
        )


def _scale(unit: np.ndarray, link_vars: Sequence[float]) -> ChannelBatch:
    var_pp, var_ps, var_sp, var_ss = (float(v) for v in link_vars)
    return ChannelBatch(
        g_ss_sq=var_ss * unit[..., 3],
        g_ps_hat_abs=np.sqrt(var_ps * unit[..., 1]),
        g_sp_hat_abs=np.sqrt(var_sp * unit[..., 2]),
        g_pp_sq=var_pp * unit[..., 0],
    )


def sample_channels(link_vars: Sequence[float], rng: np.random.Generator) -> ChannelRealization:
    """Draw one slot's realization: true ``|g_ss|^2``, ``|g_pp|^2`` and estimate magnitudes."""
    unit = rng.standard_exponential(4)
    return _scale(unit[None, :], link_vars)[0]


def sample_channel_batch(
    link_vars: Sequence[float], rng: np.random.Generator, n: int
) -> ChannelBatch:
    """Draw ``n`` realizations; consumes the stream exactly like ``n`` calls of `sample_channels`."""
    unit = rng.standard_exponential((n, 4))
    return _scale(unit, link_vars)


def worst_case_gain(g_hat_abs, epsilon):
    """Largest power gain ``|g_hat + dg|^2`` over ``|dg| <= epsilon``, i.e. ``(|g_hat| + eps)^2``."""
    return g_hat_abs * g_hat_abs + 2.0 * epsilon * g_hat_abs + epsilon * epsilon


def rate_nominal(beta, power, g_ss_sq, g_ps_sq, cfg: SystemConfig):
    """Throughput ``beta * log2(1 + g_ss p / (noise + g_ps p_p))`` in bps/Hz.

    Broadcasts over array arguments.  Zero whenever ``beta`` or ``power`` is zero.
    """
    snr = g_ss_sq * power / (cfg.noise_var + g_ps_sq * cfg.p_primary)
    return beta * np.log2(1.0 + snr)


def rate_worst_case(beta, power, ch: ChannelRealization | ChannelBatch, cfg: SystemConfig):
    """Throughput with the PT-SR gain inflated to its worst case inside the uncertainty disc."""
    g_ps = worst_case_gain(ch.g_ps_hat_abs, cfg.epsilon)
    return rate_nominal(beta, power, ch.g_ss_sq, g_ps, cfg)


def interference_cap(ch: ChannelRealization | ChannelBatch, cfg: SystemConfig):
    """Largest power whose worst-case interference at PR stays within ``p_th``."""
    g_sp = worst_case_gain(ch.g_sp_hat_abs, cfg.epsilon)
    with np.errstate(divide="ignore"):
        cap = np.divide(cfg.p_th, g_sp)
    return float(cap) if np.ndim(cap) == 0 else cap


def power_cap(ch: ChannelRealization, beta: float, battery_level: float, cfg: SystemConfig) -> float:
    """``min(B / beta, p_th / G_sp)`` for ``beta > 0``."""
    if beta <= 0:
        raise ValueError("power_cap needs beta > 0; beta = 0 is the harvest-only action")
    return float(min(battery_level / beta, interference_cap(ch, cfg)))
