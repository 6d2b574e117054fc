"""Simulation engine and experiment harness.

One run = one world: targets, delays, and clock skew all derive from the run
seed through fixed, purpose-keyed substreams, so two algorithms launched with
the same seed face byte-identical environments no matter how differently they
learn.  Monte-Carlo aggregation is a deterministic reduce over run index
order.  The delimited per-round summary (t, mean, ci_low, ci_high,
running_avg) is the primary artifact of every experiment.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .asynchrony import ClockModel, sample_execution_times
from .bandit import LearnerState, cumulative_error, learning_rate
from .config import ExperimentConfig
from .envs import (
    CameraGrid,
    CoverageWorld,
    TargetSystem,
    pilot_reward_cap,
    write_scene_csv,
)
from .network import (
    CommGraph,
    DelayModel,
    MessageBus,
    broadcast_round,
    read_delay_trace,
)

# substream keys: learner streams are (LEARNER_STREAM, agent_id); the rest are
# single-purpose.  Fixed forever so seeds stay comparable across versions.
LEARNER_STREAM = 0
TARGET_STREAM = 1
DELAY_STREAM = 2
SKEW_STREAM = 3
SPAWN_STREAM = 4
PILOT_STREAM = 5

CI_Z = 1.96  # 95% two-sided normal quantile

CSV_HEADER = ["t", "mean", "ci_low", "ci_high", "running_avg"]


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one purpose within one seeded run."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key))
    )


@dataclass
class AgentTrace:
    """Per-round learner trace of one agent."""

    rounds: list[int] = field(default_factory=list)
    chosen: list[int] = field(default_factory=list)
    p_chosen: list[float] = field(default_factory=list)
    z0: list[float] = field(default_factory=list)
    batches_applied: list[int] = field(default_factory=list)
    peak_error: list[float] | None = None  # M_t when instrumented


@dataclass
class RunResult:
    """Outcome of one seeded run."""

    seed: int
    coverage: np.ndarray  # (T,) joint objective value per round
    actions: np.ndarray  # (T, n) chosen action per agent
    realized_rewards: np.ndarray | None = None  # (T, n) true normalized rewards
    traces: list[AgentTrace] | None = None
    clamp_count: int = 0


class _World:
    """Duck-typed environment contract used by the engine (documentation)."""

    def step(self, t: int, rng: np.random.Generator) -> None: ...

    def reward(
        self, agent: int, scene: int, action: int, profile: Mapping[int, int]
    ) -> float: ...

    def joint_value(self, scene: int, actions: Sequence[int]) -> float: ...


def simulate(
    world,
    graph: CommGraph,
    delay_model: DelayModel,
    *,
    action_count: int,
    horizon: int,
    seed: int,
    algorithm: str = "dog-iu",
    rate_scale: float = 1.0,
    skew: float = 0.0,
    skew_delivery: bool = False,
    default_action: int = 0,
    collect_traces: bool = False,
    instrument: bool = False,
    delay_log: list[tuple[int, int, int, int]] | None = None,
    weight_sink: list[np.ndarray] | None = None,
) -> RunResult:
    """Run one seeded multi-agent episode.

    Tick order: the world advances, every agent draws and broadcasts its
    action, then each agent folds in the messages due this tick (newest
    knowledge first, then the initial estimate for the fresh round, then
    batch corrections for past rounds in ascending round order).  The
    baseline algorithm shares every step except that weight updates wait for
    full information.
    """
    if algorithm not in ("dog-iu", "dog"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    intermediate = algorithm == "dog-iu"
    n = graph.agent_count
    rate = learning_rate(action_count, delay_model.bound, horizon, rate_scale)
    learners = [
        LearnerState(
            action_count,
            rate,
            graph.in_neighbors[i],
            delay_model.bound,
            default_action=default_action,
            record_history=collect_traces,
        )
        for i in range(n)
    ]
    learner_rngs = [substream(seed, LEARNER_STREAM, i) for i in range(n)]
    target_rng = substream(seed, TARGET_STREAM)
    delay_rng = substream(seed, DELAY_STREAM)
    skew_rng = substream(seed, SKEW_STREAM)
    clock = ClockModel(skew)
    bus = MessageBus(
        delay_model.bound, staleness_slack=1 if skew_delivery else 0
    )

    # scene index each agent's round evaluations bind to (skew shifts it)
    exec_scene: list[dict[int, int]] = [dict() for _ in range(n)]

    def make_reward_model(i: int):
        learner = learners[i]
        scenes = exec_scene[i]

        def reward_model(s: int, profile: dict[int, int]) -> float:
            return world.reward(i, scenes[s], learner.pending[s].chosen, profile)

        return reward_model

    reward_models = [make_reward_model(i) for i in range(n)]

    coverage = np.zeros(horizon)
    actions_log = np.zeros((horizon, n), dtype=np.int64)
    realized = np.zeros((horizon, n)) if instrument else None
    m_traces: list[list[float]] | None = (
        [[] for _ in range(n)] if instrument and intermediate else None
    )

    for t in range(1, horizon + 1):
        world.step(t, target_rng)
        taus = sample_execution_times(t, n, clock, skew_rng)
        if skew == 0.0:
            scenes = [t] * n
            offsets = None
        else:
            scenes = [min(t, max(0, math.floor(tau))) for tau in taus]
            offsets = [1 if tau > t else 0 for tau in taus]
        actions = []
        probs = []
        for i in range(n):
            a, p = learners[i].sample_action(learner_rngs[i])
            actions.append(a)
            probs.append(p)
        broadcast_round(
            bus,
            graph,
            delay_model,
            t,
            actions,
            delay_rng,
            delivery_offsets=offsets if skew_delivery else None,
            delay_log=delay_log,
        )
        batches = bus.deliver(t)
        for i in range(n):
            learner = learners[i]
            mine = batches.get(i, {})
            rounds_due = sorted(mine)
            # newest knowledge first so estimates use everything received
            for s in rounds_due:
                for sender, action in mine[s]:
                    learner.note_action(sender, s, action)
            exec_scene[i][t] = scenes[i]
            pr = learner.open_round(t, actions[i], probs[i])
            if intermediate:
                z0 = reward_models[i](t, learner.estimate_profile(pr))
                learner.initial_update(t, z0)
            elif not pr.missing:
                learner.dog_baseline_step(t, [], reward_models[i])
            for s in rounds_due:
                if intermediate:
                    learner.ingest_batch(s, mine[s], reward_models[i])
                else:
                    learner.dog_baseline_step(s, mine[s], reward_models[i])
            stale = t - delay_model.bound - 2
            if stale in exec_scene[i]:
                del exec_scene[i][stale]
        coverage[t - 1] = world.joint_value(t, actions)
        actions_log[t - 1] = actions
        if weight_sink is not None:
            weight_sink.append(
                np.stack([lr.log_weights.copy() for lr in learners])
            )
        if instrument:
            for i in range(n):
                true_profile = {
                    j: int(actions_log[t - 1][j]) for j in graph.in_neighbors[i]
                }
                realized[t - 1, i] = world.reward(
                    i, exec_scene[i][t], actions[i], true_profile
                )
            if m_traces is not None:
                for i in range(n):
                    window = []
                    for s, pr in learners[i].pending.items():
                        truth = world.reward(
                            i,
                            exec_scene[i][s],
                            pr.chosen,
                            {
                                j: int(actions_log[s - 1][j])
                                for j in graph.in_neighbors[i]
                            },
                        )
                        window.append((pr.chosen, pr.prob, pr.estimate, truth))
                    _, m_t = cumulative_error(action_count, window)
                    m_traces[i].append(m_t)

    traces = None
    if collect_traces:
        traces = []
        for i, learner in enumerate(learners):
            rows = {h.round_index: h for h in learner.history}
            for s, pr in learner.pending.items():
                rows[s] = pr  # unresolved at horizon end; partial info
            trace = AgentTrace()
            if m_traces is not None:
                trace.peak_error = m_traces[i]
            for s in sorted(rows):
                h = rows[s]
                trace.rounds.append(s)
                trace.chosen.append(h.chosen)
                trace.p_chosen.append(h.prob)
                trace.z0.append(
                    h.initial_estimate
                    if not math.isnan(h.initial_estimate)
                    else float("nan")
                )
                trace.batches_applied.append(h.batches_applied)
            traces.append(trace)

    return RunResult(
        seed=seed,
        coverage=coverage,
        actions=actions_log,
        realized_rewards=realized,
        traces=traces,
        clamp_count=getattr(world, "clamp_count", 0),
    )


# ---------------------------------------------------------------------------
# Config-driven coverage runs
# ---------------------------------------------------------------------------


def build_graph(cfg: ExperimentConfig) -> CommGraph:
    if cfg.graph == "grid4":
        return CommGraph.grid4(cfg.grid_rows, cfg.grid_cols)
    return CommGraph.parse(cfg.agent_count, cfg.edges)


def build_delay_model(cfg: ExperimentConfig) -> DelayModel:
    trace = None
    if cfg.delay_kind == "trace":
        trace = read_delay_trace(cfg.delay_trace)
    return DelayModel(cfg.delay_kind, cfg.delay_bound, trace)


def build_cameras(cfg: ExperimentConfig) -> CameraGrid:
    return CameraGrid.lattice(
        cfg.grid_rows,
        cfg.grid_cols,
        cfg.workspace_width,
        cfg.workspace_height,
        cfg.headings,
        math.radians(cfg.fov_half_angle_deg),
        cfg.sensing_range,
    )


def build_world(cfg: ExperimentConfig, seed: int) -> CoverageWorld:
    cameras = build_cameras(cfg)
    targets = TargetSystem.spawn(
        substream(seed, SPAWN_STREAM),
        cfg.clusters,
        cfg.targets_per_cluster,
        cfg.target_speed,
        cfg.resample_period,
        cfg.noise_sigma,
        cfg.workspace_width,
        cfg.workspace_height,
        cfg.scatter_std,
    )
    cap = cfg.reward_cap
    if cap == 0.0:
        cap = float(
            pilot_reward_cap(cameras, targets, substream(seed, PILOT_STREAM))
        )
    # skewed delivery stretches message staleness by one tick, and a skewed
    # recipient binds a round to a scene up to ceil(skew/2) steps before it;
    # keep snapshots alive until the last tick that can still evaluate them
    window = (
        cfg.delay_bound
        + (1 if cfg.skew_delivery else 0)
        + max(0, math.ceil(cfg.skew / 2.0) - 1)
    )
    return CoverageWorld(cameras, targets, cap, window=window)


def run_single(
    cfg: ExperimentConfig,
    seed: int,
    *,
    graph: CommGraph | None = None,
    delay_model: DelayModel | None = None,
    collect_traces: bool = False,
    instrument: bool = False,
    delay_log: list | None = None,
    scene_sink: list | None = None,
) -> RunResult:
    """One seeded coverage run under a config."""
    cfg.validate()
    if cfg.graph != "grid4":
        raise ValueError("coverage runs use the grid4 layout for cameras")
    graph = graph or build_graph(cfg)
    delay_model = delay_model or build_delay_model(cfg)
    world = build_world(cfg, seed)
    if scene_sink is not None:
        world_step = world.step

        def recording_step(t: int, rng: np.random.Generator) -> None:
            world_step(t, rng)
            scene_sink.append((t, world.targets.positions.copy()))

        world.step = recording_step  # type: ignore[method-assign]
    return simulate(
        world,
        graph,
        delay_model,
        action_count=cfg.headings,
        horizon=cfg.horizon,
        seed=seed,
        algorithm=cfg.algorithm,
        rate_scale=cfg.rate_scale,
        skew=cfg.skew,
        skew_delivery=cfg.skew_delivery,
        default_action=cfg.default_action,
        collect_traces=collect_traces,
        instrument=instrument,
        delay_log=delay_log,
    )


@dataclass
class AggregateStats:
    """Per-round summary over a batch of runs."""

    rounds: np.ndarray
    mean: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    running_avg: np.ndarray
    run_count: int
    window: int

    @classmethod
    def from_curves(
        cls, curves: Sequence[np.ndarray], window: int
    ) -> "AggregateStats":
        if not curves:
            raise ValueError("need at least one run")
        data = np.asarray(curves, dtype=float)
        n, horizon = data.shape
        mean = data.mean(axis=0)
        if n > 1:
            half = CI_Z * data.std(axis=0, ddof=1) / math.sqrt(n)
        else:
            half = np.zeros(horizon)
        return cls(
            rounds=np.arange(1, horizon + 1),
            mean=mean,
            ci_low=mean - half,
            ci_high=mean + half,
            running_avg=trailing_average(mean, window),
            run_count=n,
            window=window,
        )


def trailing_average(values: np.ndarray, window: int) -> np.ndarray:
    """Mean of the last `window` entries at each position (shorter at start)."""
    if window < 1:
        raise ValueError("window must be >= 1")
    values = np.asarray(values, dtype=float)
    csum = np.concatenate([[0.0], np.cumsum(values)])
    out = np.empty_like(values)
    for t in range(len(values)):
        lo = max(0, t + 1 - window)
        out[t] = (csum[t + 1] - csum[lo]) / (t + 1 - lo)
    return out


def run_monte_carlo(
    cfg: ExperimentConfig,
    *,
    keep_results: bool = False,
) -> tuple[AggregateStats, list[RunResult]]:
    """Independent seeded runs base_seed..base_seed+runs-1, reduced in order."""
    cfg.validate()
    graph = build_graph(cfg)
    delay_model = build_delay_model(cfg)
    curves = []
    results: list[RunResult] = []
    for k in range(cfg.runs):
        result = run_single(
            cfg, cfg.base_seed + k, graph=graph, delay_model=delay_model
        )
        curves.append(result.coverage)
        if keep_results:
            results.append(result)
    stats = AggregateStats.from_curves(curves, cfg.smoothing_window)
    return stats, results


# ---------------------------------------------------------------------------
# Delimited output
# ---------------------------------------------------------------------------


def emit_csv(stats: AggregateStats | None, path) -> None:
    """t, mean, ci_low, ci_high, running_avg; full float round-trip."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        if stats is None:
            return
        for i in range(len(stats.rounds)):
            writer.writerow(
                [
                    int(stats.rounds[i]),
                    repr(float(stats.mean[i])),
                    repr(float(stats.ci_low[i])),
                    repr(float(stats.ci_high[i])),
                    repr(float(stats.running_avg[i])),
                ]
            )


def read_stats_csv(path) -> AggregateStats:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"bad summary header: {header}")
        for row in reader:
            if row:
                rows.append(row)
    if not rows:
        empty = np.zeros(0)
        return AggregateStats(empty, empty, empty, empty, empty, 0, 1)
    data = np.asarray([[float(x) for x in row] for row in rows])
    return AggregateStats(
        rounds=data[:, 0].astype(int),
        mean=data[:, 1],
        ci_low=data[:, 2],
        ci_high=data[:, 3],
        running_avg=data[:, 4],
        run_count=0,
        window=1,
    )


def write_agent_traces(result: RunResult, out_dir) -> list[str]:
    """One CSV per agent: round, chosen action, draw prob, Z0, batch count,
    and the peak cumulative estimate error when instrumented (else blank)."""
    import os

    if result.traces is None:
        raise ValueError("run was not traced; pass collect_traces=True")
    paths = []
    for i, trace in enumerate(result.traces):
        path = os.path.join(out_dir, f"agent_{i:03d}_trace.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                [
                    "round",
                    "chosen_action",
                    "p_chosen",
                    "Z0",
                    "batches_applied",
                    "M_t_if_instrumented",
                ]
            )
            for k in range(len(trace.rounds)):
                m = ""
                if trace.peak_error is not None and k < len(trace.peak_error):
                    m = repr(trace.peak_error[k])
                writer.writerow(
                    [
                        trace.rounds[k],
                        trace.chosen[k],
                        repr(trace.p_chosen[k]),
                        repr(trace.z0[k]),
                        trace.batches_applied[k],
                        m,
                    ]
                )
        paths.append(path)
    return paths
