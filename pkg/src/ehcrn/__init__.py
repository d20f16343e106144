"""Time-sharing and power policies for an energy-harvesting underlay cognitive radio link.

Robust online (stochastic DP), myopic and offline policies under bounded
channel-estimate uncertainty, plus a seeded Monte-Carlo harness.
"""

__version__ = "0.1.0"

from .channel import rate_nominal, rate_worst_case, sample_channels, worst_case_gain
from .domain import (
    Action,
    ChannelRealization,
    ConfigError,
    JointState,
    SystemConfig,
    battery_grid,
    load_config,
    validate_config,
)
from .myopic import myopic_beta
from .offline import offline_solve
from .online import backward_induction, decide
from .simulator import run_experiment, run_trial
