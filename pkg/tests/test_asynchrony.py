"""Time-stamped rewards: execution clocks, marginal credits, gap bounds."""

from __future__ import annotations

import math

import numpy as np
import pytest

from dogiu.asynchrony import (
    ClockModel,
    Deployment,
    TimeStampedRewardHandle,
    async_global_reward,
    asynchrony_gap_bound,
    audit_lipschitz,
    sample_execution_times,
    verify_gap,
    write_gap_audit,
)
from dogiu.harness import substream


def _ramp_handle(agent_count: int) -> TimeStampedRewardHandle:
    # F grows linearly in the evaluation time per deployed agent; deployment
    # times themselves do not matter, so L_deploy = 0
    def evaluate(tau: float, deps) -> float:
        return 0.1 * (1.0 + tau) * len(deps)

    return TimeStampedRewardHandle(
        evaluate, lipschitz_eval=0.1 * agent_count, lipschitz_deploy=0.0
    )


# ---------------------------------------------------------------------------
# Clocks
# ---------------------------------------------------------------------------


def test_zero_skew_is_exact_and_consumes_no_randomness():
    rng = substream(0, 3)
    times = sample_execution_times(7, 5, ClockModel(0.0), rng)
    assert times.tolist() == [7.0] * 5
    assert rng.random() == substream(0, 3).random()


def test_positive_skew_stays_within_the_band():
    rng = substream(1, 3)
    for t in (1, 10, 500):
        times = sample_execution_times(t, 64, ClockModel(0.3), rng)
        assert np.all(times > t - 0.15) and np.all(times < t + 0.15)
    with pytest.raises(ValueError):
        ClockModel(-0.1)
    with pytest.raises(ValueError):
        sample_execution_times(1, 0, ClockModel(0.0), rng)


# ---------------------------------------------------------------------------
# Marginal credits
# ---------------------------------------------------------------------------


def test_duplicate_agents_rejected():
    h = _ramp_handle(2)
    with pytest.raises(ValueError):
        async_global_reward(h, [Deployment(0, 0, 1.0), Deployment(0, 1, 2.0)])


def test_time_invariant_functions_telescope_exactly():
    # when F ignores time entirely, the credit chain collapses to F(all)
    weights = {0: 0.25, 1: 1.0, 2: 0.5}

    def evaluate(tau: float, deps) -> float:
        return sum(weights[d.agent_id] for d in deps)

    h = TimeStampedRewardHandle(evaluate, 0.0, 0.0)
    rng = substream(2, 3)
    for _ in range(100):
        taus = rng.uniform(0.0, 5.0, size=3)
        deps = [Deployment(i, 0, float(taus[i])) for i in range(3)]
        assert async_global_reward(h, deps) == pytest.approx(1.75, abs=1e-12)


def test_credit_order_follows_execution_times():
    h = _ramp_handle(2)
    deps = [Deployment(0, 0, 2.0), Deployment(1, 0, 0.0)]
    # agent 1 executes first: credit 0.1*(1+0); agent 0 joins at tau=2:
    # F(2, both) - F(2, {agent1}) = 0.1*3*2 - 0.1*3 = 0.3
    assert async_global_reward(h, deps) == pytest.approx(0.1 + 0.3)


# ---------------------------------------------------------------------------
# Gap bound
# ---------------------------------------------------------------------------


def test_gap_bound_frozen_values():
    assert asynchrony_gap_bound(1.0, 1.0, 2, 0.5) == 4.0
    assert asynchrony_gap_bound(0.5, 2.0, 16, 0.3) == pytest.approx(158.4)
    assert asynchrony_gap_bound(1.0, 1.0, 4, 0.0) == 0.0
    for bad in ((-1, 0, 1, 0.1), (0, -1, 1, 0.1), (0, 0, 0, 0.1), (0, 0, 1, -0.1)):
        with pytest.raises(ValueError):
            asynchrony_gap_bound(*bad)


def test_verify_gap_equal_times_has_zero_gap():
    h = _ramp_handle(3)
    deps = [Deployment(i, 0, 4.0) for i in range(3)]
    report = verify_gap(h, deps)
    assert report.measured_gap == 0.0
    assert report.rho_realized == 0.0
    assert report.holds
    assert verify_gap(h, []).holds


def test_verify_gap_honest_constants_hold_over_random_schedules():
    h = _ramp_handle(4)
    rng = substream(3, 3)
    for _ in range(200):
        taus = rng.uniform(2.0, 2.0 + rng.uniform(0.05, 0.5), size=4)
        deps = [Deployment(i, 0, float(taus[i])) for i in range(4)]
        report = verify_gap(h, deps)
        assert report.holds, report


def test_verify_gap_flags_understated_constants():
    dishonest = TimeStampedRewardHandle(
        _ramp_handle(2).evaluate, lipschitz_eval=1e-3, lipschitz_deploy=0.0
    )
    report = verify_gap(
        dishonest, [Deployment(0, 0, 0.0), Deployment(1, 0, 1.0)]
    )
    assert report.measured_gap > report.bound
    assert not report.holds


# ---------------------------------------------------------------------------
# Lipschitz audit
# ---------------------------------------------------------------------------


def test_audit_accepts_honest_and_rejects_understated_constants():
    h = _ramp_handle(3)
    rng = substream(4, 3)
    schedules = []
    taus = []
    for _ in range(20):
        ts = rng.uniform(1.0, 2.0, size=3)
        schedules.append([Deployment(i, 0, float(ts[i])) for i in range(3)])
        taus.append(float(rng.uniform(1.0, 2.0)))
    audit = audit_lipschitz(h, schedules, taus)
    assert audit.ok
    assert audit.max_eval_probe == pytest.approx(0.3, rel=1e-6)
    dishonest = TimeStampedRewardHandle(h.evaluate, 1e-3, 0.0)
    assert not audit_lipschitz(dishonest, schedules, taus).eval_ok
    with pytest.raises(ValueError):
        audit_lipschitz(h, schedules, taus[:-1])


def test_gap_audit_file_format(tmp_path):
    h = _ramp_handle(2)
    reports = [
        (5, verify_gap(h, [Deployment(0, 0, 1.0), Deployment(1, 0, 1.25)])),
        (6, verify_gap(h, [Deployment(0, 0, 2.0), Deployment(1, 0, 2.0)])),
    ]
    path = tmp_path / "gap_audit.csv"
    write_gap_audit(path, reports)
    lines = path.read_text().splitlines()
    assert lines[0] == "round,measured_gap,bound,holds"
    assert len(lines) == 3
    round_5 = lines[1].split(",")
    assert round_5[0] == "5" and round_5[3] == "true"
    assert float(round_5[1]) == reports[0][1].measured_gap
    assert float(round_5[2]) == reports[0][1].bound
