"""Structural analysis toolkit: assignments, curvature, coin, checks, tables."""

from __future__ import annotations

import pytest

from dogiu.envs import tabular_instance, weighted_coverage_table
from dogiu.submodular import (
    Assignment,
    GroundElement,
    SecondOrderWitness,
    SetFunctionHandle,
    brute_force_optimum,
    check_monotone_submodular,
    check_second_order_submodular,
    coin,
    curvature,
    format_value_table,
    marginal_gain,
    parse_value_table,
)

E = GroundElement


def _handle(cover_sets, weights):
    ground, table = weighted_coverage_table(cover_sets, weights)
    return ground, tabular_instance(ground, table)


# ---------------------------------------------------------------------------
# Elements and assignments
# ---------------------------------------------------------------------------


def test_ground_element_rejects_negative_ids():
    with pytest.raises(ValueError):
        E(-1, 0)
    with pytest.raises(ValueError):
        E(0, -2)


def test_assignment_one_action_per_agent():
    with pytest.raises(ValueError):
        Assignment([E(0, 0), E(0, 1)])


def test_assignment_is_immutable_and_canonically_ordered():
    a = Assignment([E(2, 5), E(0, 1)])
    assert a.agents() == (0, 2)
    assert a.action_of(2) == 5
    with pytest.raises(AttributeError):
        a.elements = ()
    with pytest.raises(KeyError):
        a.action_of(1)


def test_assignment_editing_helpers():
    a = Assignment.from_profile({0: 1, 1: 2})
    assert a.with_element(E(2, 0)).agents() == (0, 1, 2)
    with pytest.raises(ValueError):
        a.with_element(E(1, 0))  # agent 1 already assigned
    assert a.without_agent(0) == Assignment([E(1, 2)])
    assert a.restrict([1, 7]) == Assignment([E(1, 2)])
    assert E(0, 1) in a and len(a) == 2


def test_marginal_gain_rejects_assigned_agent():
    ground, h = _handle({E(0, 0): {1}, E(1, 0): {2}}, {1: 1.0, 2: 1.0})
    base = Assignment([E(0, 0)])
    assert marginal_gain(h, E(1, 0), base) == 1.0
    with pytest.raises(ValueError):
        marginal_gain(h, E(0, 0), base)


# ---------------------------------------------------------------------------
# Curvature and coin
# ---------------------------------------------------------------------------


def test_curvature_zero_for_modular_function():
    ground, h = _handle({E(0, 0): {1}, E(1, 0): {2}}, {1: 1.0, 2: 2.0})
    assert curvature(h, ground) == 0.0


def test_curvature_one_for_fully_redundant_elements():
    ground, h = _handle({E(0, 0): {1}, E(1, 0): {1}}, {1: 1.0})
    assert curvature(h, ground) == 1.0


def test_curvature_excludes_zero_value_singletons():
    ground, h = _handle({E(0, 0): {1}, E(1, 0): set()}, {1: 1.0})
    assert curvature(h, ground) == 0.0


def test_curvature_undefined_when_all_singletons_zero():
    ground, h = _handle({E(0, 0): set(), E(1, 0): set()}, {1: 1.0})
    with pytest.raises(ValueError):
        curvature(h, ground)


def test_coin_zero_with_full_neighborhood():
    ground, h = _handle({E(0, 0): {1}, E(1, 0): {1}}, {1: 1.0})
    profile = Assignment([E(0, 0), E(1, 0)])
    assert coin(h, 0, profile, [1]) == 0.0


def test_coin_measures_value_destroyed_by_unheard_agents():
    # both cameras watch the same item; with no communication each one's
    # standalone value is fully destroyed by the other
    ground, h = _handle({E(0, 0): {1}, E(1, 0): {1}}, {1: 1.0})
    profile = Assignment([E(0, 0), E(1, 0)])
    assert coin(h, 0, profile, []) == 1.0
    assert coin(h, 1, profile, []) == 1.0


def test_coin_input_validation():
    ground, h = _handle({E(0, 0): {1}, E(1, 0): {2}}, {1: 1.0, 2: 1.0})
    profile = Assignment([E(0, 0), E(1, 0)])
    with pytest.raises(KeyError):
        coin(h, 5, profile, [])
    with pytest.raises(ValueError):
        coin(h, 0, profile, [3])  # neighborhood outside the profile


# ---------------------------------------------------------------------------
# Exhaustive structure checks
# ---------------------------------------------------------------------------


def test_weighted_coverage_passes_both_checks():
    ground, h = _handle(
        {E(0, 0): {1, 2}, E(0, 1): {2, 3}, E(1, 0): {3}, E(2, 0): {1, 3}},
        {1: 0.5, 2: 1.0, 3: 2.0},
    )
    assert check_monotone_submodular(h, ground)
    assert check_second_order_submodular(h, ground)


def test_nonzero_empty_value_is_flagged():
    h = SetFunctionHandle(lambda s: 1.0)
    report = check_monotone_submodular(h, [E(0, 0)])
    assert not report.holds
    assert "f(empty)" in report.detail


def test_monotonicity_violation_is_witnessed():
    ground = [E(0, 0), E(1, 0)]
    table = {
        frozenset(): 0.0,
        frozenset({ground[0]}): 1.0,
        frozenset({ground[1]}): 0.25,
        frozenset(ground): 0.5,
    }
    report = check_monotone_submodular(tabular_instance(ground, table), ground)
    assert not report.holds
    assert "monotonicity" in report.detail
    assert report.witness.element in ground


def test_diminishing_returns_violation_is_witnessed():
    ground = [E(0, 0), E(1, 0)]
    table = {
        frozenset(): 0.0,
        frozenset({ground[0]}): 1.0,
        frozenset({ground[1]}): 1.0,
        frozenset(ground): 3.0,  # supermodular pair
    }
    report = check_monotone_submodular(tabular_instance(ground, table), ground)
    assert not report.holds
    assert "diminishing returns" in report.detail
    assert report.witness.smaller == frozenset()
    assert report.witness.larger in (
        frozenset({ground[0]}),
        frozenset({ground[1]}),
    )


def test_second_order_check_catches_rank_function():
    # min(|S|, 2) is monotone submodular but violates the second-order
    # inequality: f(s) - f(s|a) = 1 while f(s|b) - f(s|ab) = 1 - 0... with
    # three elements lhs = 0 < rhs = 1.
    ground = [E(i, 0) for i in range(3)]
    table = {}
    for mask in range(8):
        sub = frozenset(ground[i] for i in range(3) if mask >> i & 1)
        table[sub] = float(min(len(sub), 2))
    h = tabular_instance(ground, table)
    assert check_monotone_submodular(h, ground)
    report = check_second_order_submodular(h, ground)
    assert not report.holds
    assert isinstance(report.witness, SecondOrderWitness)
    assert report.witness.context == frozenset()


def test_check_refuses_oversized_ground():
    ground = [E(0, a) for a in range(13)]
    h = SetFunctionHandle(lambda s: float(len(s)))
    with pytest.raises(ValueError):
        check_monotone_submodular(h, ground, cap=12)


# ---------------------------------------------------------------------------
# Brute force optimum
# ---------------------------------------------------------------------------


def test_brute_force_finds_exact_optimum():
    ground, h = _handle(
        {E(0, 0): {1}, E(0, 1): {1, 2}, E(1, 0): {2}, E(1, 1): {3}},
        {1: 1.0, 2: 1.0, 3: 2.0},
    )
    best, value = brute_force_optimum(h, {0: [0, 1], 1: [0, 1]})
    assert value == 4.0
    assert best == Assignment([E(0, 1), E(1, 1)])


def test_brute_force_ties_break_toward_first_product_order():
    h = SetFunctionHandle(lambda s: 1.0 if s else 0.0)
    best, value = brute_force_optimum(h, {0: [0, 1], 1: [0, 1]})
    assert value == 1.0
    assert best == Assignment([E(0, 0), E(1, 0)])


def test_brute_force_validation():
    h = SetFunctionHandle(lambda s: float(len(s)))
    with pytest.raises(ValueError):
        brute_force_optimum(h, {})
    with pytest.raises(ValueError):
        brute_force_optimum(h, {0: []})
    with pytest.raises(ValueError):
        brute_force_optimum(h, {0: list(range(100)), 1: list(range(100))}, cap=10)


# ---------------------------------------------------------------------------
# Value-table text format
# ---------------------------------------------------------------------------


def test_value_table_round_trip_is_exact():
    ground, table = weighted_coverage_table(
        {E(0, 0): {1}, E(0, 1): {1, 2}, E(1, 0): {2, 3}},
        {1: 0.1, 2: 1.0 / 3.0, 3: 2.25},
    )
    text = format_value_table(ground, table)
    ground2, table2 = parse_value_table(text)
    assert ground2 == ground
    assert table2 == table  # repr round-trip keeps every float exact
    assert format_value_table(ground2, table2) == text


def test_value_table_multi_action_fields():
    ground, table = parse_value_table(
        "ground,2,1\n-,-,0.0\n0+1,-,2.5\n0,0,1.5\n"
    )
    assert ground == [E(0, 0), E(0, 1), E(1, 0)]
    assert table[frozenset({E(0, 0), E(0, 1)})] == 2.5
    assert table[frozenset({E(0, 0), E(1, 0)})] == 1.5


@pytest.mark.parametrize(
    "text, message",
    [
        ("0,-,1.0\n", "expected 'ground' header"),
        ("ground,x\n", "bad ground header"),
        ("ground,2,0\n", "action counts must be >= 1"),
        ("ground,2\n0,1,1.0\n", "expected 1 agent fields"),
        ("ground,2\nq,1.0\n", "bad action token"),
        ("ground,2\n5,1.0\n", "out of range"),
        ("ground,2\n0+0,1.0\n", "duplicate action token"),
        ("ground,2\n0,oops\n", "bad value"),
        ("ground,2\n0,1.0\n0,2.0\n", "duplicate subset"),
        ("", "no ground header"),
    ],
)
def test_value_table_parse_errors(text, message):
    with pytest.raises(ValueError, match=message):
        parse_value_table(text)


def test_value_table_errors_carry_line_numbers():
    with pytest.raises(ValueError, match="line 3"):
        parse_value_table("# comment\nground,2\nbogus,1.0\n")


def test_format_requires_contiguous_agents():
    with pytest.raises(ValueError):
        format_value_table([E(1, 0)], {frozenset(): 0.0})
