import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ehcrn.channel import (
    power_cap,
    rate_nominal,
    rate_worst_case,
    sample_channel_batch,
    sample_channels,
    worst_case_gain,
)
from ehcrn.domain import ChannelRealization, SystemConfig

nonneg = st.floats(0.0, 10.0)
eps = st.floats(0.0, 1.0)


def test_worst_case_gain_examples():
    assert worst_case_gain(1.0, 0.0) == 1.0
    assert worst_case_gain(1.0, 0.05) == pytest.approx(1.1025, abs=1e-15)
    assert worst_case_gain(0.0, 0.3) == pytest.approx(0.09, abs=1e-15)


@given(nonneg, eps)
def test_worst_case_gain_is_square_of_sum(g, e):
    assert worst_case_gain(g, e) == pytest.approx((g + e) ** 2, rel=1e-12, abs=1e-15)
    assert worst_case_gain(g, e) >= g * g


def test_rate_nominal_examples():
    cfg = SystemConfig(noise_var=0.1)
    assert rate_nominal(1.0, 1.0, 1.0, 0.0, cfg) == pytest.approx(math.log2(11.0), abs=1e-12)
    assert rate_nominal(1.0, 1.0, 1.0, 0.0, cfg) == pytest.approx(3.4594, abs=1e-4)
    assert rate_nominal(0.0, 5.0, 1.0, 0.3, cfg) == 0.0
    assert rate_nominal(0.5, 0.0, 1.0, 0.3, cfg) == 0.0


def test_rate_worst_case_examples():
    cfg = SystemConfig(epsilon=0.05, noise_var=0.1, p_primary=2.0)
    ch = ChannelRealization(g_ss_sq=1.0, g_ps_hat_abs=1.0, g_sp_hat_abs=0.0)
    expected = math.log2(1.0 + 1.0 / (0.1 + 2 * 1.1025))
    assert rate_worst_case(1.0, 1.0, ch, cfg) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.5198, abs=1e-4)
    cfg0 = cfg.replace(epsilon=0.0)
    assert rate_worst_case(0.7, 1.3, ch, cfg0) == rate_nominal(0.7, 1.3, 1.0, 1.0, cfg0)


@given(st.floats(0, 1), nonneg, nonneg, st.floats(0, 3), eps, eps)
def test_rate_worst_case_monotone_in_epsilon(beta, p, gss, gps, e1, e2):
    lo, hi = sorted((e1, e2))
    ch = ChannelRealization(gss, gps, 0.0)
    r_lo = rate_worst_case(beta, p, ch, SystemConfig(epsilon=lo))
    r_hi = rate_worst_case(beta, p, ch, SystemConfig(epsilon=hi))
    assert r_hi <= r_lo + 1e-12
    assert r_lo <= rate_nominal(beta, p, gss, gps * gps, SystemConfig()) + 1e-12


@given(st.floats(0.01, 1), st.floats(0, 5), st.floats(0, 5), nonneg, st.floats(0, 3), eps)
def test_rate_concave_in_power(beta, p1, p2, gss, gps, e):
    cfg = SystemConfig(epsilon=e)
    ch = ChannelRealization(gss, gps, 0.0)
    mid = rate_worst_case(beta, 0.5 * (p1 + p2), ch, cfg)
    chord = 0.5 * (rate_worst_case(beta, p1, ch, cfg) + rate_worst_case(beta, p2, ch, cfg))
    assert mid >= chord - 1e-12


def test_power_cap_examples():
    cfg = SystemConfig(epsilon=0.0, p_th=1.0)
    assert power_cap(ChannelRealization(1.0, 0.0, 1.0), 1.0, 1e9, cfg) == 1.0
    assert power_cap(ChannelRealization(1.0, 0.0, 1e-6), 0.5, 0.4, cfg) == pytest.approx(0.8)
    cfg = cfg.replace(epsilon=0.05)
    assert power_cap(ChannelRealization(1.0, 0.0, 1.0), 1.0, 1e9, cfg) == pytest.approx(1 / 1.1025)
    assert 1 / 1.1025 == pytest.approx(0.9070, abs=1e-4)
    with pytest.raises(ValueError):
        power_cap(ChannelRealization(1.0, 0.0, 1.0), 0.0, 1.0, cfg)


@given(st.floats(0.01, 1), st.floats(0, 2), st.floats(0, 3), eps, st.floats(0.1, 3))
def test_power_cap_bounds_worst_case_interference(beta, b, gsp, e, p_th):
    cfg = SystemConfig(epsilon=e, p_th=p_th)
    ch = ChannelRealization(1.0, 0.0, gsp)
    p = power_cap(ch, beta, b, cfg)
    assert worst_case_gain(gsp, e) * p <= p_th * (1 + 1e-12)
    assert beta * p <= b * (1 + 1e-12)


def test_zero_variance_gives_zero_gain():
    ch = sample_channels((0.0, 0.0, 0.0, 0.0), np.random.default_rng(1))
    assert ch == ChannelRealization(0.0, 0.0, 0.0, 0.0)


def test_sampling_deterministic():
    a = [sample_channels((1, 1, 1, 1), np.random.default_rng(7)) for _ in range(2)]
    assert a[0] == a[1]
    rng = np.random.default_rng(3)
    seq = [sample_channels((1, 0.5, 2, 1), rng) for _ in range(5)]
    batch = sample_channel_batch((1, 0.5, 2, 1), np.random.default_rng(3), 5)
    assert list(batch) == seq


def test_power_gain_means():
    # exponential-mean oracle: E|g|^2 = variance
    b = sample_channel_batch((1.0, 0.5, 2.0, 1.0), np.random.default_rng(11), 10**6)
    assert b.g_ss_sq.mean() == pytest.approx(1.0, abs=0.01)
    assert (b.g_ps_hat_abs**2).mean() == pytest.approx(0.5, abs=0.01)
    assert (b.g_sp_hat_abs**2).mean() == pytest.approx(2.0, abs=0.02)
    # Rayleigh magnitude mean sqrt(pi * s2) / 2
    assert b.g_ps_hat_abs.mean() == pytest.approx(math.sqrt(math.pi * 0.5) / 2, abs=0.005)
