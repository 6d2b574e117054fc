"""Per-agent adversarial bandit learner with delayed, piecewise feedback.

Each agent runs multiplicative weights over its own action set.  At each
round it draws an action from the softmax of its log-weights and immediately
applies an update built from an importance-weighted reward *estimate*; as
neighbor actions for past rounds trickle in, it replaces old estimates with
better ones through correction updates that cost nothing extra in regret
bookkeeping (the corrections telescope).  The baseline mode instead defers a
round's single update until every neighbor action for that round is known.

Weights live in log domain and are re-centered after every update so the
softmax stays overflow-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

RewardModel = Callable[[int, dict[int, int]], float]
# reward_model(round, neighbor_action_profile) -> normalized reward in [0, 1].
# The profile maps every neighbor id to an action: truly received actions for
# some, the learner's current best estimates for the rest.


def learning_rate(
    action_count: int,
    delay_bound: int,
    horizon: int,
    scale: float = 1.0,
) -> float:
    """scale * sqrt(ln K / ((K + dbar) * T))."""
    if action_count < 2:
        raise ValueError("need at least 2 actions for a meaningful rate")
    if delay_bound < 0:
        raise ValueError("delay bound must be >= 0")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if scale <= 0:
        raise ValueError("rate scale must be positive")
    return scale * math.sqrt(
        math.log(action_count) / ((action_count + delay_bound) * horizon)
    )


def learning_rate_tuned(
    action_count: int,
    horizon: int,
    mean_peak_error: float,
) -> float:
    """Error-adaptive rate sqrt(ln K / (K T (1 + M/4))).

    ``mean_peak_error`` is the horizon average of the per-round maximum
    absolute cumulative estimate error; instrumentation-only since it is not
    observable online.
    """
    if action_count < 2:
        raise ValueError("need at least 2 actions for a meaningful rate")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if mean_peak_error < 0:
        raise ValueError("mean peak error must be >= 0")
    return math.sqrt(
        math.log(action_count)
        / (action_count * horizon * (1.0 + mean_peak_error / 4.0))
    )


def softmax(log_weights: np.ndarray) -> np.ndarray:
    """Probability vector from log-domain weights; shift-invariant."""
    z = np.asarray(log_weights, dtype=float)
    z = z - z.max()
    p = np.exp(z)
    return p / p.sum()


def importance_weighted_estimate(
    action: int, chosen: int, prob: float, x: float
) -> float:
    """1 - 1(action == chosen) * (1 - x) / prob.

    Implicit estimate 1 for unchosen actions; the chosen action is reweighted
    by its draw probability so the estimate is unbiased under the draw.
    """
    if action != chosen:
        return 1.0
    if prob <= 0.0:
        raise ValueError("chosen-action probability must be positive")
    return 1.0 - (1.0 - x) / prob


def estimate_vector(
    action_count: int, chosen: int, prob: float, x: float
) -> np.ndarray:
    """Importance-weighted estimates for all actions at once."""
    if prob <= 0.0:
        raise ValueError("chosen-action probability must be positive")
    out = np.ones(action_count)
    out[chosen] = 1.0 - (1.0 - x) / prob
    return out


@dataclass(slots=True)
class PendingRound:
    """Bookkeeping for one round whose neighbor actions are still arriving."""

    round_index: int
    chosen: int
    prob: float
    missing: set[int]
    known_actions: dict[int, int] = field(default_factory=dict)
    estimate: float = float("nan")  # current Z for this round
    initial_estimate: float = float("nan")  # Z before any batch arrived
    batches_applied: int = 0


@dataclass(slots=True)
class ResolvedRound:
    """Trace entry kept after a round's last neighbor action arrived."""

    round_index: int
    chosen: int
    prob: float
    reward: float  # final estimate == true normalized reward
    initial_estimate: float
    batches_applied: int


class LearnerState:
    """Exclusively-owned state of one agent's bandit learner."""

    def __init__(
        self,
        action_count: int,
        rate: float,
        neighbors: Iterable[int],
        delay_bound: int,
        default_action: int = 0,
        record_history: bool = False,
    ) -> None:
        if action_count < 1:
            raise ValueError("action_count must be >= 1")
        if rate <= 0:
            raise ValueError("learning rate must be positive")
        if not 0 <= default_action < action_count:
            raise ValueError("default action out of range")
        self.action_count = action_count
        self.rate = rate
        self.neighbors = frozenset(neighbors)
        self.delay_bound = delay_bound
        self.default_action = default_action
        self.log_weights = np.zeros(action_count)
        self.pending: dict[int, PendingRound] = {}
        self.last_known: dict[int, tuple[int, int]] = {}  # neighbor -> (round, action)
        self.record_history = record_history
        self.history: list[ResolvedRound] = []

    # -- knowledge ---------------------------------------------------------

    def note_action(self, neighbor: int, round_index: int, action: int) -> None:
        """Remember the newest known action of a neighbor."""
        if neighbor not in self.neighbors:
            raise ValueError(f"{neighbor} is not a neighbor")
        held = self.last_known.get(neighbor)
        if held is None or round_index > held[0]:
            self.last_known[neighbor] = (round_index, action)

    def estimated_action(self, neighbor: int) -> int:
        held = self.last_known.get(neighbor)
        return self.default_action if held is None else held[1]

    def estimate_profile(self, pr: PendingRound) -> dict[int, int]:
        """Received actions plus last-known estimates for missing neighbors."""
        profile = dict(pr.known_actions)
        for j in pr.missing:
            profile[j] = self.estimated_action(j)
        return profile

    # -- weight updates ----------------------------------------------------

    def probabilities(self) -> np.ndarray:
        return softmax(self.log_weights)

    def sample_action(self, rng: np.random.Generator) -> tuple[int, float]:
        """Draw an action from the current softmax; returns (action, prob)."""
        p = self.probabilities()
        u = rng.random()
        idx = int(np.searchsorted(np.cumsum(p), u, side="right"))
        if idx >= self.action_count:
            idx = self.action_count - 1
        return idx, float(p[idx])

    def _recenter(self) -> None:
        self.log_weights -= self.log_weights.max()

    def _apply_estimate(self, pr: PendingRound, x: float) -> np.ndarray:
        delta = self.rate * estimate_vector(self.action_count, pr.chosen, pr.prob, x)
        self.log_weights += delta
        self._recenter()
        return delta

    def open_round(self, t: int, chosen: int, prob: float) -> PendingRound:
        if t in self.pending:
            raise ValueError(f"round {t} already open")
        if not 0 <= chosen < self.action_count:
            raise ValueError("chosen action out of range")
        if not 0.0 < prob <= 1.0:
            raise ValueError("draw probability must be in (0, 1]")
        pr = PendingRound(t, chosen, prob, set(self.neighbors))
        self.pending[t] = pr
        return pr

    def initial_update(self, t: int, z0: float) -> np.ndarray:
        """First update for round t from the all-estimated reward Z0."""
        pr = self.pending.get(t)
        if pr is None:
            raise KeyError(f"round {t} is not open")
        if pr.batches_applied or not math.isnan(pr.initial_estimate):
            raise ValueError(f"round {t} already received its initial update")
        z0 = _clamp01(z0)
        pr.initial_estimate = z0
        pr.estimate = z0
        delta = self._apply_estimate(pr, z0)
        if not pr.missing:
            # nothing to wait for; the estimate already is the truth
            self._retire(pr)
        return delta

    def correction_update(self, s: int, z_new: float, z_prev: float) -> np.ndarray:
        """Replace a previous estimate; only the chosen entry moves."""
        pr = self.pending.get(s)
        if pr is None:
            raise KeyError(f"round {s} is not open")
        delta = np.zeros(self.action_count)
        delta[pr.chosen] = self.rate * (z_new - z_prev) / pr.prob
        self.log_weights += delta
        self._recenter()
        return delta

    def _retire(self, pr: PendingRound) -> None:
        del self.pending[pr.round_index]
        if self.record_history:
            self.history.append(
                ResolvedRound(
                    pr.round_index,
                    pr.chosen,
                    pr.prob,
                    pr.estimate,
                    pr.initial_estimate,
                    pr.batches_applied,
                )
            )

    def ingest_batch(
        self,
        s: int,
        arrivals: Sequence[tuple[int, int]],
        reward_model: RewardModel,
    ) -> np.ndarray | None:
        """Fold one batch of round-s neighbor actions into the weights.

        Re-estimates the round reward from received actions plus last-known
        estimates for the still-missing neighbors, then applies the
        correction.  Returns the applied increment, or None for an empty
        batch.  The round retires once no neighbor is missing.
        """
        pr = self._absorb_arrivals(s, arrivals)
        if not arrivals:
            return None
        z_prev = pr.estimate
        z_new = _clamp01(reward_model(s, self.estimate_profile(pr)))
        delta = self.correction_update(s, z_new, z_prev)
        pr.estimate = z_new
        pr.batches_applied += 1
        if not pr.missing:
            self._retire(pr)
        return delta

    def dog_baseline_step(
        self,
        s: int,
        arrivals: Sequence[tuple[int, int]],
        reward_model: RewardModel,
    ) -> np.ndarray | None:
        """Deferred-update baseline: one update per round, on completion.

        Identical machinery and bookkeeping, but the weights move only at the
        tick when the last neighbor action for round s arrives, using the
        true (fully informed) reward.
        """
        pr = self._absorb_arrivals(s, arrivals)
        pr.batches_applied += 1 if arrivals else 0
        if pr.missing:
            return None
        truth = _clamp01(reward_model(s, dict(pr.known_actions)))
        pr.estimate = truth
        if math.isnan(pr.initial_estimate):
            pr.initial_estimate = truth
        delta = self._apply_estimate(pr, truth)
        self._retire(pr)
        return delta

    def _absorb_arrivals(
        self, s: int, arrivals: Sequence[tuple[int, int]]
    ) -> PendingRound:
        pr = self.pending.get(s)
        if pr is None:
            raise KeyError(f"no open round {s} for this batch")
        for sender, action in arrivals:
            if sender not in pr.missing:
                raise ValueError(
                    f"round {s}: arrival from {sender} already received "
                    "or not a neighbor"
                )
        for sender, action in arrivals:
            pr.missing.discard(sender)
            pr.known_actions[sender] = action
            self.note_action(sender, s, action)
        return pr


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else float(x))


# ---------------------------------------------------------------------------
# Instrumentation: cumulative estimate error and static regret
# ---------------------------------------------------------------------------


@dataclass
class RegretLedger:
    """Omniscient per-agent traces collected by an instrumented run."""

    realized_rewards: list[float] = field(default_factory=list)
    chosen_actions: list[int] = field(default_factory=list)
    peak_errors: list[float] = field(default_factory=list)  # M_t per round
    true_tables: list[np.ndarray] = field(default_factory=list)  # per-round r_a

    def static_regret(self) -> float:
        table = np.asarray(self.true_tables)
        realized = np.asarray(self.realized_rewards)
        return static_regret(realized, table)

    def mean_peak_error(self) -> float:
        if not self.peak_errors:
            return 0.0
        return float(np.mean(self.peak_errors))


def cumulative_error(
    action_count: int,
    window: Iterable[tuple[int, float, float, float]],
) -> tuple[np.ndarray, float]:
    """Cumulative estimate error per action and its max magnitude M_t.

    ``window`` holds (chosen, prob, estimate, truth) for each round s in the
    trailing window {t - dbar + 1, ..., t}.  Resolved rounds contribute zero
    (their estimate equals the truth).  Returns (eps, M_t) where
    eps[a] = sum over the window of rhat_a(estimate) - rhat_a(truth), which
    collapses to (estimate - truth)/prob on the chosen action.
    """
    if action_count < 1:
        raise ValueError("action_count must be >= 1")
    eps = np.zeros(action_count)
    for chosen, prob, estimate, truth in window:
        if prob <= 0.0:
            raise ValueError("draw probability must be positive")
        eps[chosen] += (estimate - truth) / prob
    return eps, float(np.abs(eps).max())


def static_regret(
    realized_rewards: Sequence[float],
    true_tables: np.ndarray,
) -> float:
    """max over fixed actions of its cumulative true reward, minus realized.

    ``true_tables`` has shape (T, K): the true reward every action would have
    earned each round given the neighbors' realized actions.
    """
    table = np.asarray(true_tables, dtype=float)
    realized = np.asarray(realized_rewards, dtype=float)
    if table.ndim != 2 or table.shape[0] != realized.shape[0]:
        raise ValueError("true_tables must be (rounds, actions)")
    return float(table.sum(axis=0).max() - realized.sum())
