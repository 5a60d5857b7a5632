"""Quadrotor rotational-dynamics simulation engine with an episodic RL interface."""

from .controllers import (
    DEFAULT_PID_GAINS,
    PidController,
    PidGains,
    RandomController,
    ZeroController,
    make_controller,
)
from .dynamics import (
    InputLimits,
    LinearModel,
    QuadParams,
    StateLimits,
    build_linear_model,
    compute_hard_state_limits,
    compute_input_limits,
    linear_deriv,
    mix_torques_to_motors,
    motors_to_torques,
    nonlinear_deriv,
    rotation_matrix,
    rpm_to_rad_per_s,
    soft_state_limits,
)
from .env import CostWeights, EnvConfig, Environment, StepResult, compute_reward, sample_reference, wrap_angle
from .errors import (
    BatchError,
    ConfigError,
    EpisodeDoneError,
    IntegrationError,
    ProtocolError,
    QuadSimError,
)
from .harness import batch, compare, limits_report, run_episode
from .integrator import IntegratorConfig, integrate_grid, integrate_interval
from .metrics import (
    MetricThresholds,
    MetricsTable,
    StepResponseMetrics,
    Trajectory,
    compute_metrics,
    metrics_table,
)

__version__ = "0.1.0"
