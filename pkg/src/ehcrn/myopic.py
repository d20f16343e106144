"""Robust myopic baseline: spend each slot's harvest within the same slot.

With transmit power tied to the harvest, ``p = (1 - beta) E / beta``, the
slot throughput is a concave function of ``beta`` alone and is maximised by
golden-section search over the interval allowed by the interference limit.
"""

from __future__ import annotations

import math

import numpy as np

from .channel import worst_case_gain
from .domain import Action, ChannelRealization, SystemConfig

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
BETA_TOL = 1e-9


def myopic_objective(beta, ch: ChannelRealization, harvest_rate: float, cfg: SystemConfig):
    """Slot throughput as a function of ``beta`` alone (0 at ``beta = 0`` by continuity)."""
    beta = np.asarray(beta, dtype=float)
    denom = cfg.noise_var + worst_case_gain(ch.g_ps_hat_abs, cfg.epsilon) * cfg.p_primary
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = (1.0 - beta) * ch.g_ss_sq * harvest_rate / (beta * denom)
        f = beta * np.log2(1.0 + snr)
    f = np.where(beta > 0, f, 0.0)
    return float(f) if f.ndim == 0 else f


def min_beta(ch: ChannelRealization, harvest_rate: float, cfg: SystemConfig) -> float:
    """Smallest ``beta`` with ``(1 - beta) G_sp E <= beta p_th``."""
    load = worst_case_gain(ch.g_sp_hat_abs, cfg.epsilon) * harvest_rate
    return load / (cfg.p_th + load)


def golden_section_max(f, lo: float, hi: float, tol: float = BETA_TOL) -> float:
    """Maximiser of a unimodal ``f`` on ``[lo, hi]``; endpoints are also compared."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    # concave maximum may sit on the boundary; max() keeps the first on ties
    return max((0.5 * (a + b), lo, hi), key=f)


def myopic_beta(ch: ChannelRealization, harvest_rate: float, cfg: SystemConfig) -> Action:
    """Myopic time share and the power that spends the slot's harvest."""
    if harvest_rate <= 0 or ch.g_ss_sq <= 0:
        # nothing to gain; transmit-only null action
        return Action(1.0, 0.0)
    lo = min_beta(ch, harvest_rate, cfg)
    beta = golden_section_max(lambda x: myopic_objective(x, ch, harvest_rate, cfg), lo, 1.0)
    beta = min(max(beta, lo), 1.0)
    power = (1.0 - beta) * harvest_rate / beta
    return Action(beta, power)
