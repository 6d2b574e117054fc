"""Set-function analysis tools for multi-agent action selection.

The ground set consists of (agent, action) pairs.  A set function assigns a
value to every subset of the ground set; the game layer only ever evaluates
joint profiles (at most one action per agent), while the analysis operations
below (curvature, structural checks) quantify over arbitrary subsets.

All exhaustive checks are oracles for small instances: they refuse to run
above a configurable element cap instead of falling back to sampling.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

log = logging.getLogger(__name__)

# Violations must exceed this slack before a check reports a counterexample;
# keeps exact-arithmetic instances (integer coverage counts) from tripping on
# float noise.
VIOLATION_TOL = 1e-9

# Exhaustive checks enumerate 2^n subsets (and worse); hard refusal above this.
DEFAULT_CHECK_CAP = 12

# brute_force_optimum enumerates the full action product.
DEFAULT_PRODUCT_CAP = 1_000_000


@dataclass(frozen=True, order=True)
class GroundElement:
    """One deployable action of one agent."""

    agent_id: int
    action_id: int

    def __post_init__(self) -> None:
        if self.agent_id < 0 or self.action_id < 0:
            raise ValueError("agent_id and action_id must be non-negative")


class Assignment:
    """A joint action profile: at most one action per agent.

    Elements are kept sorted by agent_id, which is also the canonical
    serialization order.
    """

    __slots__ = ("elements",)

    def __init__(self, elements: Iterable[GroundElement] = ()) -> None:
        elems = tuple(sorted(elements, key=lambda e: e.agent_id))
        agents = [e.agent_id for e in elems]
        if len(set(agents)) != len(agents):
            raise ValueError("assignment holds more than one action for an agent")
        object.__setattr__(self, "elements", elems)

    def __setattr__(self, name: str, value) -> None:
        raise AttributeError("Assignment is immutable")

    @classmethod
    def from_profile(cls, profile: Mapping[int, int]) -> "Assignment":
        return cls(GroundElement(i, a) for i, a in profile.items())

    def agents(self) -> tuple[int, ...]:
        return tuple(e.agent_id for e in self.elements)

    def action_of(self, agent_id: int) -> int:
        for e in self.elements:
            if e.agent_id == agent_id:
                return e.action_id
        raise KeyError(f"agent {agent_id} not assigned")

    def with_element(self, element: GroundElement) -> "Assignment":
        return Assignment(self.elements + (element,))

    def without_agent(self, agent_id: int) -> "Assignment":
        return Assignment(e for e in self.elements if e.agent_id != agent_id)

    def restrict(self, agent_ids: Iterable[int]) -> "Assignment":
        keep = set(agent_ids)
        return Assignment(e for e in self.elements if e.agent_id in keep)

    def as_set(self) -> frozenset[GroundElement]:
        return frozenset(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, element: GroundElement) -> bool:
        return element in self.elements

    def __eq__(self, other) -> bool:
        return isinstance(other, Assignment) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        body = ", ".join(f"{e.agent_id}:{e.action_id}" for e in self.elements)
        return f"Assignment({body})"


@dataclass
class SetFunctionHandle:
    """Evaluation interface for a set function over GroundElements.

    ``evaluate`` must accept any finite collection of elements and return a
    non-negative real with f(empty) = 0.  ``reward_cap`` is the constant B
    used to map single-agent marginal gains into [0, 1] for the learners.
    """

    evaluate: Callable[[frozenset[GroundElement]], float]
    reward_cap: float = 1.0
    description: str = ""

    def __call__(self, elements: Iterable[GroundElement]) -> float:
        return float(self.evaluate(frozenset(elements)))


def _memoized(f: SetFunctionHandle) -> Callable[[frozenset[GroundElement]], float]:
    """Per-call memo so each distinct subset is evaluated once."""
    cache: dict[frozenset[GroundElement], float] = {}

    def ev(elements: frozenset[GroundElement]) -> float:
        got = cache.get(elements)
        if got is None:
            got = float(f.evaluate(elements))
            cache[elements] = got
        return got

    return ev


def marginal_gain(
    f: SetFunctionHandle,
    element: GroundElement,
    base: Assignment,
) -> float:
    """f(element | base) = f(base + element) - f(base).

    ``base`` must not already assign an action to the element's agent.
    """
    if any(e.agent_id == element.agent_id for e in base):
        raise ValueError(f"agent {element.agent_id} already assigned in base")
    with_e = base.as_set() | {element}
    return float(f.evaluate(frozenset(with_e))) - float(f.evaluate(base.as_set()))


def conditional_value(
    f: SetFunctionHandle,
    element: GroundElement,
    context: frozenset[GroundElement],
) -> float:
    """f(element | context) with no agent-uniqueness restriction on context."""
    return float(f.evaluate(context | {element})) - float(f.evaluate(context))


def curvature(f: SetFunctionHandle, ground: Sequence[GroundElement]) -> float:
    """1 - min_v [f(V) - f(V \\ v)] / f(v) over the given ground set V.

    Elements with f({v}) = 0 contribute nothing to either side of the
    curvature bound and are excluded from the min; each exclusion is noted on
    the run log.  Requires at least one element with positive singleton value.
    """
    elems = list(ground)
    if len(set(elems)) != len(elems):
        raise ValueError("ground set contains duplicate elements")
    if not elems:
        raise ValueError("ground set is empty")
    ev = _memoized(f)
    full = frozenset(elems)
    f_full = ev(full)
    ratios = []
    for v in elems:
        f_v = ev(frozenset((v,)))
        if f_v <= 0.0:
            log.info("curvature: excluding zero-value singleton %r from the min", v)
            continue
        ratios.append((f_full - ev(full - {v})) / f_v)
    if not ratios:
        raise ValueError("all singleton values are zero; curvature undefined")
    return 1.0 - min(ratios)


def coin(
    f: SetFunctionHandle,
    agent_id: int,
    profile: Assignment,
    neighborhood: Iterable[int],
) -> float:
    """Cost of interdependence for one agent under a joint profile.

    coin = f(a_i) - f(a_i | {a_j : j outside the neighborhood, j != i}).
    It measures how much of agent i's standalone value is destroyed by the
    actions of agents it cannot communicate with; with a full neighborhood the
    conditioning set is empty and coin is exactly 0.
    """
    agents = set(profile.agents())
    if agent_id not in agents:
        raise KeyError(f"profile does not assign agent {agent_id}")
    hood = set(neighborhood)
    hood.discard(agent_id)
    if not hood.issubset(agents - {agent_id}):
        raise ValueError("neighborhood mentions agents outside the profile")
    a_i = GroundElement(agent_id, profile.action_of(agent_id))
    outsiders = frozenset(
        e for e in profile if e.agent_id != agent_id and e.agent_id not in hood
    )
    ev = _memoized(f)
    alone = ev(frozenset((a_i,)))
    conditioned = ev(outsiders | {a_i}) - ev(outsiders)
    return alone - conditioned


class SubmodularityWitness(NamedTuple):
    smaller: frozenset[GroundElement]
    larger: frozenset[GroundElement]
    element: GroundElement


class SecondOrderWitness(NamedTuple):
    block_a: frozenset[GroundElement]
    block_b: frozenset[GroundElement]
    context: frozenset[GroundElement]
    element: GroundElement


@dataclass
class CheckReport:
    holds: bool
    witness: SubmodularityWitness | SecondOrderWitness | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.holds


def _mask_values(
    f: SetFunctionHandle, elems: list[GroundElement]
) -> list[float]:
    """f over all 2^n subsets, indexed by bitmask over elems."""
    ev = _memoized(f)
    n = len(elems)
    values = [0.0] * (1 << n)
    for mask in range(1 << n):
        subset = frozenset(elems[i] for i in range(n) if mask >> i & 1)
        values[mask] = ev(subset)
    return values


def _subset_of_mask(mask: int, elems: list[GroundElement]) -> frozenset[GroundElement]:
    return frozenset(e for i, e in enumerate(elems) if mask >> i & 1)


def _check_ground(ground: Sequence[GroundElement], cap: int) -> list[GroundElement]:
    elems = list(ground)
    if len(set(elems)) != len(elems):
        raise ValueError("ground set contains duplicate elements")
    if len(elems) > cap:
        raise ValueError(
            f"ground set has {len(elems)} elements, above the exhaustive-check "
            f"cap of {cap}; refusing to sample"
        )
    return elems


def check_monotone_submodular(
    f: SetFunctionHandle,
    ground: Sequence[GroundElement],
    cap: int = DEFAULT_CHECK_CAP,
) -> CheckReport:
    """Exhaustively verify f(empty)=0, monotonicity, and diminishing returns.

    Diminishing returns is checked over every triple (A subset of B, s not in
    B): f(s|A) >= f(s|B).  The first violated triple is returned as a witness.
    """
    elems = _check_ground(ground, cap)
    n = len(elems)
    fm = _mask_values(f, elems)
    if abs(fm[0]) > VIOLATION_TOL:
        return CheckReport(False, None, f"f(empty) = {fm[0]!r}, expected 0")
    full = (1 << n) - 1
    for mask in range(1 << n):
        rest = full & ~mask
        s = rest
        while s:
            bit = s & -s
            if fm[mask | bit] < fm[mask] - VIOLATION_TOL:
                e = elems[bit.bit_length() - 1]
                return CheckReport(
                    False,
                    SubmodularityWitness(
                        _subset_of_mask(mask, elems),
                        _subset_of_mask(mask | bit, elems),
                        e,
                    ),
                    "monotonicity violated: "
                    f"f(A + s) = {fm[mask | bit]!r} < f(A) = {fm[mask]!r}",
                )
            s ^= bit
    # Diminishing returns over all (A subset of B, s): for each s and B, the
    # marginal at B must not exceed the smallest marginal over subsets of B.
    # The subset-minimum is built bottom-up over one-bit extensions, which
    # covers every pair A subset of B exactly.
    for si in range(n):
        sbit = 1 << si
        marg = [0.0] * (1 << n)
        for mask in range(1 << n):
            if mask & sbit:
                continue
            marg[mask] = fm[mask | sbit] - fm[mask]
        best = list(marg)  # best[mask] = min over A subset of mask of marg[A]
        for bi in range(n):
            if bi == si:
                continue
            bbit = 1 << bi
            for mask in range(1 << n):
                if mask & bbit and not mask & sbit:
                    prior = best[mask ^ bbit]
                    if prior < best[mask]:
                        best[mask] = prior
        for mask in range(1 << n):
            if mask & sbit:
                continue
            if best[mask] < marg[mask] - VIOLATION_TOL:
                # recover a concrete A subset of B witnessing the violation
                small = 0
                sub = mask
                while True:
                    if marg[sub] < marg[small]:
                        small = sub
                    if sub == 0:
                        break
                    sub = (sub - 1) & mask
                return CheckReport(
                    False,
                    SubmodularityWitness(
                        _subset_of_mask(small, elems),
                        _subset_of_mask(mask, elems),
                        elems[si],
                    ),
                    "diminishing returns violated: "
                    f"f(s|A) = {marg[small]!r} < f(s|B) = {marg[mask]!r}",
                )
    return CheckReport(True, None, f"verified over {n} elements")


def check_second_order_submodular(
    f: SetFunctionHandle,
    ground: Sequence[GroundElement],
    cap: int = DEFAULT_CHECK_CAP,
) -> CheckReport:
    """Exhaustively verify the second-order diminishing-returns inequality.

    For every element s and pairwise-disjoint A, B, C not containing s:
        f(s|C) - f(s|A+C) >= f(s|B+C) - f(s|A+B+C).
    Enumeration assigns each non-s element to one of A, B, C, or none, so the
    cost is n * 4^(n-1) inequality checks; fine for oracle-sized grounds.
    """
    elems = _check_ground(ground, cap)
    n = len(elems)
    fm = _mask_values(f, elems)
    others = list(range(n))
    for si in range(n):
        sbit = 1 << si
        rest = [i for i in others if i != si]

        def marg(mask: int) -> float:
            return fm[mask | sbit] - fm[mask]

        for combo in itertools.product(range(4), repeat=len(rest)):
            a = b = c = 0
            for idx, slot in zip(rest, combo):
                if slot == 1:
                    a |= 1 << idx
                elif slot == 2:
                    b |= 1 << idx
                elif slot == 3:
                    c |= 1 << idx
            lhs = marg(c) - marg(a | c)
            rhs = marg(b | c) - marg(a | b | c)
            if lhs < rhs - VIOLATION_TOL:
                return CheckReport(
                    False,
                    SecondOrderWitness(
                        _subset_of_mask(a, elems),
                        _subset_of_mask(b, elems),
                        _subset_of_mask(c, elems),
                        elems[si],
                    ),
                    f"second-order inequality violated: {lhs!r} < {rhs!r}",
                )
    return CheckReport(True, None, f"verified over {n} elements")


def brute_force_optimum(
    f: SetFunctionHandle,
    action_sets: Mapping[int, Sequence[int]],
    cap: int = DEFAULT_PRODUCT_CAP,
) -> tuple[Assignment, float]:
    """Exact maximizer of f over the full joint-action product.

    Ties break toward the canonical assignment order (lowest action indices
    first).  Refuses products larger than ``cap``.
    """
    agents = sorted(action_sets)
    if not agents:
        raise ValueError("no agents given")
    sizes = 1
    for i in agents:
        if not action_sets[i]:
            raise ValueError(f"agent {i} has an empty action set")
        sizes *= len(action_sets[i])
        if sizes > cap:
            raise ValueError(f"action product exceeds cap of {cap}")
    ev = _memoized(f)
    best_profile: Assignment | None = None
    best_value = float("-inf")
    for combo in itertools.product(*(action_sets[i] for i in agents)):
        profile = Assignment(
            GroundElement(i, a) for i, a in zip(agents, combo)
        )
        value = ev(profile.as_set())
        if value > best_value:
            best_value = value
            best_profile = profile
    assert best_profile is not None
    return best_profile, best_value


# ---------------------------------------------------------------------------
# Plain-text value tables
#
# Line format: one field per agent (comma separated) then the f-value.  A
# field is '-' for "agent deploys nothing" or action indices joined by '+'
# (multi-action fields describe analysis-layer subsets, not joint profiles).
# A 'ground' header declares the per-agent action counts.  Example:
#
#     ground,2,2
#     -,-,0.0
#     0,-,0.5
#     0+1,-,0.75
#     0,1,0.9
#     ...
# ---------------------------------------------------------------------------


def parse_value_table(
    text: str,
) -> tuple[list[GroundElement], dict[frozenset[GroundElement], float]]:
    """Parse a value table; returns the declared ground set and the map."""
    counts: list[int] | None = None
    table: dict[frozenset[GroundElement], float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [p.strip() for p in line.split(",")]
        if counts is None:
            if fields[0] != "ground":
                raise ValueError(
                    f"line {lineno}: expected 'ground' header before data"
                )
            try:
                counts = [int(p) for p in fields[1:]]
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad ground header") from exc
            if not counts or any(c < 1 for c in counts):
                raise ValueError(f"line {lineno}: action counts must be >= 1")
            continue
        if len(fields) != len(counts) + 1:
            raise ValueError(
                f"line {lineno}: expected {len(counts)} agent fields plus a value"
            )
        subset: set[GroundElement] = set()
        for agent, fld in enumerate(fields[:-1]):
            if fld == "-":
                continue
            for tok in fld.split("+"):
                try:
                    action = int(tok)
                except ValueError as exc:
                    raise ValueError(
                        f"line {lineno}: bad action token {tok!r}"
                    ) from exc
                if not 0 <= action < counts[agent]:
                    raise ValueError(
                        f"line {lineno}: action {action} out of range for agent {agent}"
                    )
                element = GroundElement(agent, action)
                if element in subset:
                    raise ValueError(f"line {lineno}: duplicate action token")
                subset.add(element)
        try:
            value = float(fields[-1])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value {fields[-1]!r}") from exc
        key = frozenset(subset)
        if key in table:
            raise ValueError(f"line {lineno}: duplicate subset entry")
        table[key] = value
    if counts is None:
        raise ValueError("table has no ground header")
    ground = [
        GroundElement(i, a) for i, c in enumerate(counts) for a in range(c)
    ]
    return ground, table


def read_value_table(
    path,
) -> tuple[list[GroundElement], dict[frozenset[GroundElement], float]]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_value_table(fh.read())


def format_value_table(
    ground: Sequence[GroundElement],
    table: Mapping[frozenset[GroundElement], float],
) -> str:
    """Serialize a table in the format parse_value_table reads."""
    agents = sorted({e.agent_id for e in ground})
    if agents != list(range(len(agents))):
        raise ValueError("ground agents must be contiguous from 0")
    counts = [0] * len(agents)
    for e in ground:
        counts[e.agent_id] = max(counts[e.agent_id], e.action_id + 1)
    lines = ["ground," + ",".join(str(c) for c in counts)]
    def key(subset: frozenset[GroundElement]):
        return (len(subset), sorted((e.agent_id, e.action_id) for e in subset))
    for subset in sorted(table, key=key):
        fields = []
        for agent in agents:
            actions = sorted(e.action_id for e in subset if e.agent_id == agent)
            fields.append("+".join(str(a) for a in actions) if actions else "-")
        fields.append(repr(float(table[subset])))
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def write_value_table(path, ground, table) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_value_table(ground, table))
