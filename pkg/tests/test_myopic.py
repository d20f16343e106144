import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ehcrn.channel import worst_case_gain
from ehcrn.domain import ChannelRealization, SystemConfig
from ehcrn.myopic import min_beta, myopic_beta, myopic_objective


def dense_argmax(f, lo, hi, n=10**4):
    """Two-level uniform scan: n points on [lo, hi], then n points around the best."""
    x = np.linspace(lo, hi, n)
    k = int(np.argmax(f(x)))
    h = (hi - lo) / (n - 1)
    x2 = np.linspace(max(lo, x[k] - h), min(hi, x[k] + h), n)
    k2 = int(np.argmax(f(x2)))
    return x2[k2], f(x2)[k2]


def test_no_harvest_gives_null_action():
    a = myopic_beta(ChannelRealization(1.0, 0.5, 0.5), 0.0, SystemConfig())
    assert (a.beta, a.power) == (1.0, 0.0)


def test_unconstrained_interior_optimum():
    cfg = SystemConfig(p_th=1e12, epsilon=0.0)
    ch = ChannelRealization(1.3, 0.7, 0.9)
    assert min_beta(ch, 0.5, cfg) == pytest.approx(0.0, abs=1e-10)
    a = myopic_beta(ch, 0.5, cfg)
    x = np.linspace(0, 1, 10**4)
    assert myopic_objective(a.beta, ch, 0.5, cfg) >= myopic_objective(x, ch, 0.5, cfg).max() - 1e-12


def test_reference_instance():
    cfg = SystemConfig(epsilon=0.0, p_th=1.0, noise_var=0.1, p_primary=2.0)
    ch = ChannelRealization(g_ss_sq=1.0, g_ps_hat_abs=0.0, g_sp_hat_abs=1.0)
    assert min_beta(ch, 0.5, cfg) == pytest.approx(1 / 3, abs=1e-15)
    a = myopic_beta(ch, 0.5, cfg)
    x_star, _ = dense_argmax(lambda b: myopic_objective(b, ch, 0.5, cfg), 1 / 3, 1.0)
    assert a.beta == pytest.approx(x_star, abs=1e-6)


channels = st.builds(
    ChannelRealization,
    st.floats(0.01, 5.0),
    st.floats(0.0, 3.0),
    st.floats(0.0, 3.0),
)


@settings(max_examples=50, deadline=None)
@given(channels, st.floats(0.05, 1.0), st.floats(0.0, 0.3), st.floats(0.1, 3.0))
def test_solution_properties(ch, e, eps, p_th):
    cfg = SystemConfig(epsilon=eps, p_th=p_th)
    a = myopic_beta(ch, e, cfg)
    g_sp = worst_case_gain(ch.g_sp_hat_abs, eps)
    assert (1 - a.beta) * g_sp * e <= a.beta * p_th + 1e-9
    assert a.beta * a.power == pytest.approx((1 - a.beta) * e, abs=1e-12)
    f = lambda b: myopic_objective(b, ch, e, cfg)
    _, f_scan = dense_argmax(f, min_beta(ch, e, cfg), 1.0)
    assert f(a.beta) >= f_scan - 1e-6


@given(channels, st.floats(0.05, 1.0), st.floats(1e-3, 1.0), st.floats(1e-3, 1.0))
def test_objective_concave(ch, e, b1, b2):
    cfg = SystemConfig()
    f = lambda b: myopic_objective(b, ch, e, cfg)
    assert f(0.5 * (b1 + b2)) >= 0.5 * (f(b1) + f(b2)) - 1e-12
