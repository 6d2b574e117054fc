"""Clock skew, time-stamped rewards, and the asynchrony gap bound.

Logical rounds are shared, but each agent executes round t at its own
physical time tau_i(t), with pairwise mismatch bounded by rho.  A
time-stamped reward F(tau, deployments) values a set of (agent, action,
deployment time) triples at evaluation time tau; the asynchronous global
reward credits each agent its marginal contribution at its own execution
time, in execution order.  When all execution times coincide the credits
telescope back to the plain set-function value.

The gap between the asynchronous reward and its synchronous counterpart
(everyone deployed at the latest execution time) is bounded by
(2 * L_eval * n + L_deploy * n^2) * rho for any F that is L_eval-Lipschitz
in evaluation time and L_deploy-Lipschitz in each deployment time.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

# holds-check slack: the bound is a true inequality, the slack only absorbs
# float rounding in the comparison itself.
GAP_TOL = 1e-9

# finite-difference audit settings
FD_STEP = 1e-4
FD_TOL = 0.05  # declared constants must dominate probes within 5%


class Deployment(NamedTuple):
    agent_id: int
    action_id: int
    tau: float


@dataclass(frozen=True)
class ClockModel:
    """Bounded-skew clocks: tau_i(t) uniform in (t - rho/2, t + rho/2)."""

    skew_bound: float = 0.0

    def __post_init__(self) -> None:
        if self.skew_bound < 0:
            raise ValueError("skew bound must be >= 0")


def sample_execution_times(
    t: int,
    agent_count: int,
    model: ClockModel,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-agent physical execution times for logical round t.

    With zero skew every agent executes exactly at t and no randomness is
    consumed, so synchronous runs do not perturb the stream.
    """
    if agent_count < 1:
        raise ValueError("agent_count must be >= 1")
    if model.skew_bound == 0.0:
        return np.full(agent_count, float(t))
    half = model.skew_bound / 2.0
    return rng.uniform(t - half, t + half, size=agent_count)


@dataclass
class TimeStampedRewardHandle:
    """F(tau, deployments) with declared Lipschitz constants.

    ``evaluate`` takes the evaluation time and a sequence of Deployment
    triples and returns a non-negative value with F(tau, ()) = 0.
    ``lipschitz_eval`` bounds |dF/dtau|; ``lipschitz_deploy`` bounds the
    change of F per unit change of any single deployment time.
    """

    evaluate: Callable[[float, Sequence[Deployment]], float]
    lipschitz_eval: float
    lipschitz_deploy: float
    description: str = ""

    def __call__(self, tau: float, deployments: Sequence[Deployment]) -> float:
        return float(self.evaluate(tau, deployments))


def async_global_reward(
    handle: TimeStampedRewardHandle,
    deployments: Sequence[Deployment],
) -> float:
    """Sum of per-agent marginal contributions at their execution times.

    Agents are ordered by execution time (ties by agent id); agent k earns
    F(tau_k, D_k) - F(tau_k, D_{k-1}) where D_k is the first k deployments.
    """
    agents = [d.agent_id for d in deployments]
    if len(set(agents)) != len(agents):
        raise ValueError("duplicate agent in deployment list")
    ordered = sorted(deployments, key=lambda d: (d.tau, d.agent_id))
    total = 0.0
    for k in range(len(ordered)):
        tau_k = ordered[k].tau
        with_k = handle(tau_k, ordered[: k + 1])
        without_k = handle(tau_k, ordered[:k]) if k else 0.0
        total += with_k - without_k
    return total


def asynchrony_gap_bound(
    lipschitz_eval: float,
    lipschitz_deploy: float,
    agent_count: int,
    rho: float,
) -> float:
    """(2 * L_eval * n + L_deploy * n^2) * rho."""
    if lipschitz_eval < 0 or lipschitz_deploy < 0:
        raise ValueError("Lipschitz constants must be >= 0")
    if agent_count < 1:
        raise ValueError("agent_count must be >= 1")
    if rho < 0:
        raise ValueError("rho must be >= 0")
    n = agent_count
    return (2.0 * lipschitz_eval * n + lipschitz_deploy * n * n) * rho


class GapReport(NamedTuple):
    measured_gap: float
    bound: float
    holds: bool
    rho_realized: float


def verify_gap(
    handle: TimeStampedRewardHandle,
    deployments: Sequence[Deployment],
) -> GapReport:
    """Compare the async reward against the synchronous reference.

    The reference deploys every action at the latest execution time and
    evaluates there.  The bound uses the realized time spread of the
    schedule, which is itself a valid pairwise-mismatch bound.
    """
    if not deployments:
        return GapReport(0.0, 0.0, True, 0.0)
    taus = [d.tau for d in deployments]
    tau_ref = max(taus)
    rho_realized = tau_ref - min(taus)
    sync_deps = [Deployment(d.agent_id, d.action_id, tau_ref) for d in deployments]
    sync_value = handle(tau_ref, sync_deps)
    async_value = async_global_reward(handle, deployments)
    gap = abs(async_value - sync_value)
    bound = asynchrony_gap_bound(
        handle.lipschitz_eval,
        handle.lipschitz_deploy,
        len(deployments),
        rho_realized,
    )
    return GapReport(gap, bound, gap <= bound + GAP_TOL, rho_realized)


class LipschitzAudit(NamedTuple):
    max_eval_probe: float
    max_deploy_probe: float
    eval_ok: bool
    deploy_ok: bool

    @property
    def ok(self) -> bool:
        return self.eval_ok and self.deploy_ok


def audit_lipschitz(
    handle: TimeStampedRewardHandle,
    schedules: Sequence[Sequence[Deployment]],
    tau_points: Sequence[float],
    step: float = FD_STEP,
    tol: float = FD_TOL,
) -> LipschitzAudit:
    """Central finite differences against the declared constants.

    For each (schedule, tau) pair, probes dF/dtau and dF/dtau_j for every
    deployment j.  Declared constants must dominate every probe within
    ``tol`` relative slack.
    """
    if len(schedules) != len(tau_points):
        raise ValueError("need one tau point per schedule")
    max_eval = 0.0
    max_deploy = 0.0
    for deps, tau in zip(schedules, tau_points):
        hi = handle(tau + step, deps)
        lo = handle(tau - step, deps)
        max_eval = max(max_eval, abs(hi - lo) / (2.0 * step))
        for j, d in enumerate(deps):
            bumped_hi = list(deps)
            bumped_hi[j] = Deployment(d.agent_id, d.action_id, d.tau + step)
            bumped_lo = list(deps)
            bumped_lo[j] = Deployment(d.agent_id, d.action_id, d.tau - step)
            diff = handle(tau, bumped_hi) - handle(tau, bumped_lo)
            max_deploy = max(max_deploy, abs(diff) / (2.0 * step))
    return LipschitzAudit(
        max_eval,
        max_deploy,
        max_eval <= handle.lipschitz_eval * (1.0 + tol),
        max_deploy <= handle.lipschitz_deploy * (1.0 + tol),
    )


def write_gap_audit(path, reports: Iterable[tuple[int, GapReport]]) -> None:
    """CSV with one audited round per row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["round", "measured_gap", "bound", "holds"])
        for round_index, report in reports:
            writer.writerow(
                [
                    round_index,
                    repr(report.measured_gap),
                    repr(report.bound),
                    "true" if report.holds else "false",
                ]
            )
