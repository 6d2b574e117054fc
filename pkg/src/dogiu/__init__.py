"""Distributed online greedy action selection with intermediate bandit
updates under heterogeneous message delays and bounded clock skew, plus the
submodular analysis toolkit and the multi-camera coverage benchmark."""

from .asynchrony import (
    ClockModel,
    Deployment,
    GapReport,
    LipschitzAudit,
    TimeStampedRewardHandle,
    async_global_reward,
    asynchrony_gap_bound,
    audit_lipschitz,
    sample_execution_times,
    verify_gap,
    write_gap_audit,
)
from .bandit import (
    LearnerState,
    PendingRound,
    RegretLedger,
    ResolvedRound,
    cumulative_error,
    estimate_vector,
    importance_weighted_estimate,
    learning_rate,
    learning_rate_tuned,
    softmax,
    static_regret,
)
from .config import (
    ExperimentConfig,
    parse_config,
    read_config,
    write_config,
)
from .envs import (
    CameraGrid,
    CoverageWorld,
    TabularWorld,
    TargetSystem,
    coverage_set_function,
    covered_count,
    pilot_reward_cap,
    sector_masks,
    smoothed_time_stamped_reward,
    tabular_instance,
    weighted_coverage_table,
    write_scene_csv,
)
from .harness import (
    AgentTrace,
    AggregateStats,
    RunResult,
    emit_csv,
    read_stats_csv,
    run_monte_carlo,
    run_single,
    simulate,
    substream,
    trailing_average,
    write_agent_traces,
)
from .network import (
    CommGraph,
    DelayModel,
    InFlightMessage,
    MessageBus,
    broadcast,
    broadcast_round,
    read_delay_trace,
    sample_delay,
    sample_link_delays,
    write_delay_trace,
)
from .submodular import (
    Assignment,
    CheckReport,
    GroundElement,
    SetFunctionHandle,
    brute_force_optimum,
    check_monotone_submodular,
    check_second_order_submodular,
    coin,
    conditional_value,
    curvature,
    marginal_gain,
    read_value_table,
    write_value_table,
)

__version__ = "0.1.0"

__all__ = [
    "AgentTrace",
    "AggregateStats",
    "Assignment",
    "CameraGrid",
    "CheckReport",
    "ClockModel",
    "CommGraph",
    "CoverageWorld",
    "DelayModel",
    "Deployment",
    "ExperimentConfig",
    "GapReport",
    "GroundElement",
    "InFlightMessage",
    "LearnerState",
    "LipschitzAudit",
    "MessageBus",
    "PendingRound",
    "RegretLedger",
    "ResolvedRound",
    "RunResult",
    "SetFunctionHandle",
    "TabularWorld",
    "TargetSystem",
    "TimeStampedRewardHandle",
    "async_global_reward",
    "asynchrony_gap_bound",
    "audit_lipschitz",
    "broadcast",
    "broadcast_round",
    "brute_force_optimum",
    "check_monotone_submodular",
    "check_second_order_submodular",
    "coin",
    "conditional_value",
    "coverage_set_function",
    "covered_count",
    "cumulative_error",
    "curvature",
    "emit_csv",
    "estimate_vector",
    "importance_weighted_estimate",
    "learning_rate",
    "learning_rate_tuned",
    "marginal_gain",
    "parse_config",
    "pilot_reward_cap",
    "read_config",
    "read_delay_trace",
    "read_stats_csv",
    "read_value_table",
    "run_monte_carlo",
    "run_single",
    "sample_delay",
    "sample_execution_times",
    "sample_link_delays",
    "sector_masks",
    "simulate",
    "smoothed_time_stamped_reward",
    "softmax",
    "static_regret",
    "substream",
    "tabular_instance",
    "trailing_average",
    "verify_gap",
    "weighted_coverage_table",
    "write_agent_traces",
    "write_config",
    "write_delay_trace",
    "write_gap_audit",
    "write_scene_csv",
    "write_value_table",
]
