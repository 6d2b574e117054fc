"""Communication graphs, per-link delay models, and the message bus.

Messages carry only (origin round, action).  Delays are integer round counts
in [0, bound], sampled independently per (link, round).  The bus is a
deterministic priority structure: deliveries at a tick come out sorted by
(recipient, round, sender), so replaying a seeded run is reproducible.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

DELAY_KINDS = ("constant", "uniform", "trace")


@dataclass(frozen=True)
class CommGraph:
    """Directed communication graph; in_neighbors[i] are the agents i hears."""

    agent_count: int
    in_neighbors: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        if self.agent_count < 1:
            raise ValueError("agent_count must be >= 1")
        if len(self.in_neighbors) != self.agent_count:
            raise ValueError("in_neighbors length must equal agent_count")
        for i, hood in enumerate(self.in_neighbors):
            for j in hood:
                if not 0 <= j < self.agent_count:
                    raise ValueError(f"neighbor id {j} out of range")
                if j == i:
                    raise ValueError(f"agent {i} lists itself as a neighbor")

    @classmethod
    def from_edges(
        cls, agent_count: int, edges: Iterable[tuple[int, int]]
    ) -> "CommGraph":
        """Build from directed (sender, recipient) pairs."""
        hoods: list[set[int]] = [set() for _ in range(agent_count)]
        for sender, recipient in edges:
            if not 0 <= recipient < agent_count:
                raise ValueError(f"recipient {recipient} out of range")
            hoods[recipient].add(sender)
        return cls(agent_count, tuple(frozenset(h) for h in hoods))

    @classmethod
    def grid4(cls, rows: int, cols: int) -> "CommGraph":
        """Two-way 4-neighbor lattice; agent id = row * cols + col."""
        if rows < 1 or cols < 1:
            raise ValueError("grid dimensions must be >= 1")
        edges = []
        for r in range(rows):
            for c in range(cols):
                i = r * cols + c
                if c + 1 < cols:
                    edges.append((i, i + 1))
                    edges.append((i + 1, i))
                if r + 1 < rows:
                    edges.append((i, i + cols))
                    edges.append((i + cols, i))
        return cls.from_edges(rows * cols, edges)

    @classmethod
    def parse(cls, agent_count: int, edge_text: str) -> "CommGraph":
        """Parse 'sender>recipient' pairs separated by ';'."""
        edges = []
        for part in edge_text.split(";"):
            part = part.strip()
            if not part:
                continue
            try:
                s, r = part.split(">")
                edges.append((int(s), int(r)))
            except ValueError as exc:
                raise ValueError(f"bad edge token {part!r}") from exc
        return cls.from_edges(agent_count, edges)

    def links(self) -> tuple[tuple[int, int], ...]:
        """All directed (sender, recipient) pairs in canonical order."""
        out = []
        for i in range(self.agent_count):
            for j in self.in_neighbors[i]:
                out.append((j, i))
        out.sort()
        return tuple(out)

    def out_neighbors(self, sender: int) -> tuple[int, ...]:
        return tuple(
            i
            for i in range(self.agent_count)
            if sender in self.in_neighbors[i]
        )


@dataclass(frozen=True)
class DelayModel:
    """Per-link delay distribution with hard bound ``bound``.

    kind 'constant' always returns bound, 'uniform' draws from {0..bound},
    'trace' replays a recorded table keyed by (sender, recipient, round).
    """

    kind: str
    bound: int
    trace: Mapping[tuple[int, int, int], int] | None = None

    def __post_init__(self) -> None:
        if self.kind not in DELAY_KINDS:
            raise ValueError(f"unknown delay kind {self.kind!r}")
        if self.bound < 0:
            raise ValueError("delay bound must be >= 0")
        if self.kind == "trace":
            if self.trace is None:
                raise ValueError("trace delay model requires a trace table")
            bad = [k for k, d in self.trace.items() if not 0 <= d <= self.bound]
            if bad:
                raise ValueError(
                    f"trace delay out of [0, {self.bound}] at {bad[0]}"
                )
        elif self.trace is not None:
            raise ValueError("only the trace kind takes a trace table")


def sample_delay(
    model: DelayModel,
    sender: int,
    recipient: int,
    round_index: int,
    rng: np.random.Generator,
) -> int:
    """One delay draw for one link at one round."""
    if model.kind == "constant":
        return model.bound
    if model.kind == "uniform":
        return int(rng.integers(0, model.bound + 1))
    assert model.trace is not None
    key = (sender, recipient, round_index)
    if key not in model.trace:
        raise KeyError(f"delay trace has no entry for {key}")
    return model.trace[key]


def sample_link_delays(
    model: DelayModel,
    links: Sequence[tuple[int, int]],
    round_index: int,
    rng: np.random.Generator,
) -> list[int]:
    """Delays for every link of one round, drawn in canonical link order."""
    if model.kind == "constant":
        return [model.bound] * len(links)
    if model.kind == "uniform":
        return [int(d) for d in rng.integers(0, model.bound + 1, size=len(links))]
    return [
        sample_delay(model, s, r, round_index, rng) for s, r in links
    ]


class InFlightMessage(NamedTuple):
    sender: int
    recipient: int
    round_index: int
    action: int
    deliver_at: int


class MessageBus:
    """Holds in-flight messages and releases them at their delivery tick."""

    def __init__(self, staleness_bound: int, staleness_slack: int = 0) -> None:
        if staleness_bound < 0:
            raise ValueError("staleness bound must be >= 0")
        self.staleness_bound = staleness_bound
        self.staleness_slack = staleness_slack
        self._due: dict[int, list[InFlightMessage]] = {}
        self.sent_count = 0
        self.delivered_count = 0

    def enqueue(self, message: InFlightMessage) -> None:
        if message.deliver_at < message.round_index:
            raise ValueError("cannot deliver before the origin round")
        self._due.setdefault(message.deliver_at, []).append(message)
        self.sent_count += 1

    def pending_count(self) -> int:
        return sum(len(v) for v in self._due.values())

    def deliver(
        self, t: int
    ) -> dict[int, dict[int, list[tuple[int, int]]]]:
        """All messages due at tick t, grouped recipient -> round -> batch.

        Batches are sorted by sender.  Asserts bounded staleness on every
        delivery: t - origin round <= bound (+slack for skewed delivery).
        """
        msgs = self._due.pop(t, [])
        msgs.sort(key=lambda m: (m.recipient, m.round_index, m.sender))
        out: dict[int, dict[int, list[tuple[int, int]]]] = {}
        limit = self.staleness_bound + self.staleness_slack
        for m in msgs:
            staleness = t - m.round_index
            if staleness > limit:
                raise AssertionError(
                    f"staleness {staleness} exceeds bound {limit} "
                    f"for message {m}"
                )
            out.setdefault(m.recipient, {}).setdefault(m.round_index, []).append(
                (m.sender, m.action)
            )
        self.delivered_count += len(msgs)
        return out


def broadcast(
    bus: MessageBus,
    graph: CommGraph,
    model: DelayModel,
    sender: int,
    round_index: int,
    action: int,
    rng: np.random.Generator,
) -> list[InFlightMessage]:
    """Send one agent's round action to every out-neighbor.

    Recipients are visited in ascending id order so delay draws are
    reproducible.  Returns the enqueued messages.
    """
    sent = []
    for recipient in graph.out_neighbors(sender):
        d = sample_delay(model, sender, recipient, round_index, rng)
        msg = InFlightMessage(sender, recipient, round_index, action, round_index + d)
        bus.enqueue(msg)
        sent.append(msg)
    return sent


def broadcast_round(
    bus: MessageBus,
    graph: CommGraph,
    model: DelayModel,
    round_index: int,
    actions: Sequence[int],
    rng: np.random.Generator,
    delivery_offsets: Sequence[int] | None = None,
    delay_log: list[tuple[int, int, int, int]] | None = None,
) -> None:
    """Send every agent's round action in one batch.

    Delays for all links are drawn in one call over the canonical link order,
    so paired runs that share a seed see identical delay realizations no
    matter which algorithm is learning.  ``delivery_offsets`` optionally adds
    a per-sender shift (used when clock skew moves physical send times).
    """
    links = graph.links()
    delays = sample_link_delays(model, links, round_index, rng)
    for (sender, recipient), d in zip(links, delays):
        offset = delivery_offsets[sender] if delivery_offsets is not None else 0
        msg = InFlightMessage(
            sender,
            recipient,
            round_index,
            actions[sender],
            round_index + d + offset,
        )
        bus.enqueue(msg)
        if delay_log is not None:
            delay_log.append((sender, recipient, round_index, d))


# ---------------------------------------------------------------------------
# Delay trace files: CSV with header sender,recipient,round,delay
# ---------------------------------------------------------------------------


def read_delay_trace(path) -> dict[tuple[int, int, int], int]:
    table: dict[tuple[int, int, int], int] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["sender", "recipient", "round", "delay"]:
            raise ValueError(f"bad delay trace header: {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"bad delay trace row: {row}")
            sender, recipient, round_index, delay = (int(x) for x in row)
            key = (sender, recipient, round_index)
            if key in table:
                raise ValueError(f"duplicate delay trace entry for {key}")
            if delay < 0:
                raise ValueError(f"negative delay for {key}")
            table[key] = delay
    return table


def write_delay_trace(path, rows: Iterable[tuple[int, int, int, int]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sender", "recipient", "round", "delay"])
        for sender, recipient, round_index, delay in rows:
            writer.writerow([sender, recipient, round_index, delay])
