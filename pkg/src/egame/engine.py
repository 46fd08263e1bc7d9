"""Plays the numbers game on any E-GCM graph.

Positions are plain tuples of floats, one value per node in the graph's
declared order.  Firing node i requires value > EPS_LEGAL there; it negates
that value and adds ``amp(i -> j) * value`` to every neighbor j.  All
operations are pure: positions and traces are immutable values.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .graph import EGCMGraph, NodeId

# A value counts as fireable only above this; keeps legality stable under the
# roundoff that irrational amplitudes produce.
EPS_LEGAL = 1e-9

Position = tuple  # tuple[float, ...]


class EngineError(ValueError):
    """Base class for game-engine failures."""


class DimensionMismatchError(EngineError):
    pass


class IllegalFireError(EngineError):
    def __init__(self, node: NodeId, value: float):
        super().__init__(f"node {node!r} is not fireable: value {value!r} <= {EPS_LEGAL}")
        self.node = node
        self.value = value


class Outcome(str, Enum):
    TERMINATED = "terminated"
    MOVE_LIMIT_REACHED = "move_limit_reached"
    ABORTED = "aborted"


def check_position(graph: EGCMGraph, values: Sequence[float]) -> Position:
    vals = tuple(float(v) for v in values)
    if len(vals) != graph.node_count:
        raise DimensionMismatchError(
            f"position has {len(vals)} values for a {graph.node_count}-node graph"
        )
    if not all(math.isfinite(v) for v in vals):
        raise EngineError(f"position values must be finite, got {vals!r}")
    return vals


def legal_indices(graph: EGCMGraph, position: Position) -> list[int]:
    return [i for i, v in enumerate(position) if v > EPS_LEGAL]


def legal_moves(graph: EGCMGraph, position: Position) -> set[NodeId]:
    """Node ids currently fireable (value > EPS_LEGAL)."""
    if len(position) != graph.node_count:
        raise DimensionMismatchError(
            f"position has {len(position)} values for a {graph.node_count}-node graph"
        )
    return {graph.nodes[i] for i in legal_indices(graph, position)}


def fire_index(graph: EGCMGraph, position: Position, i: int) -> Position:
    """Fire the node at index i; raises IllegalFireError below the threshold."""
    v = position[i]
    if v <= EPS_LEGAL:
        raise IllegalFireError(graph.nodes[i], v)
    after = list(position)
    after[i] = -v
    for j, amp in graph.neighbors[i]:
        after[j] = after[j] + amp * v
    return tuple(after)


def fire(graph: EGCMGraph, position: Position, node: NodeId) -> Position:
    """Fire ``node``; pure, the input position is untouched."""
    if len(position) != graph.node_count:
        raise DimensionMismatchError(
            f"position has {len(position)} values for a {graph.node_count}-node graph"
        )
    return fire_index(graph, position, graph.index(node))


@dataclass(frozen=True)
class FiringEvent:
    node: NodeId
    before: Position
    after: Position
    fired_value: float


@dataclass(frozen=True)
class GameTrace:
    graph: EGCMGraph
    initial: Position
    events: tuple[FiringEvent, ...]
    outcome: Outcome
    diagnostic: str | None = None

    @property
    def final(self) -> Position:
        return self.events[-1].after if self.events else self.initial

    def __len__(self) -> int:
        return len(self.events)


def apply_sequence(
    graph: EGCMGraph, position: Position, nodes: Iterable[NodeId]
) -> tuple[Position, list[FiringEvent]]:
    """Fire the listed nodes in order; raises IllegalFireError on the first illegal one."""
    pos = check_position(graph, position)
    events: list[FiringEvent] = []
    for node in nodes:
        i = graph.index(node)
        after = fire_index(graph, pos, i)
        events.append(FiringEvent(node=node, before=pos, after=after, fired_value=pos[i]))
        pos = after
    return pos, events


# -- strategies ---------------------------------------------------------------
#
# A strategy is any object with choose(graph, position, legal) -> node id, where
# ``legal`` is the current fireable id set.  Returning None stops the game
# (recorded as an aborted trace).  Randomized strategies own their generator;
# one instance must not be shared across concurrent plays.


class FixedSequence:
    """Fires the given nodes verbatim; stops when the list is exhausted."""

    def __init__(self, nodes: Sequence[NodeId]):
        self._nodes = list(nodes)
        self._at = 0

    def choose(self, graph: EGCMGraph, position: Position, legal: frozenset) -> NodeId | None:
        if self._at >= len(self._nodes):
            return None
        node = self._nodes[self._at]
        self._at += 1
        return node


class RandomSeeded:
    """Uniform choice among legal moves, reproducible per seed."""

    def __init__(self, seed: int):
        self.seed = seed
        self._rng = random.Random(seed)

    def choose(self, graph: EGCMGraph, position: Position, legal: frozenset) -> NodeId | None:
        if not legal:
            return None
        ordered = sorted(legal, key=graph.index)
        return self._rng.choice(ordered)


class GreedyMax:
    """Fires the legal node of largest value; ties go to the earliest node."""

    def choose(self, graph: EGCMGraph, position: Position, legal: frozenset) -> NodeId | None:
        if not legal:
            return None
        return max(sorted(legal, key=graph.index), key=lambda n: position[graph.index(n)])


def play(graph: EGCMGraph, position: Position, strategy, max_moves: int) -> GameTrace:
    """Ask ``strategy`` for legal nodes and fire until stuck, stopped, or capped.

    Outcomes: ``terminated`` when no node is fireable, ``move_limit_reached``
    when ``max_moves`` firings happened with moves still available, ``aborted``
    when the strategy stops or names an illegal node (diagnostic recorded).
    """
    if max_moves < 0:
        raise EngineError(f"max_moves must be >= 0, got {max_moves}")
    pos = check_position(graph, position)
    initial = pos
    events: list[FiringEvent] = []
    while True:
        legal = legal_indices(graph, pos)
        if not legal:
            return GameTrace(graph, initial, tuple(events), Outcome.TERMINATED)
        if len(events) >= max_moves:
            return GameTrace(graph, initial, tuple(events), Outcome.MOVE_LIMIT_REACHED)
        choice = strategy.choose(graph, pos, frozenset(graph.nodes[i] for i in legal))
        if choice is None:
            return GameTrace(
                graph, initial, tuple(events), Outcome.ABORTED, diagnostic="strategy stopped"
            )
        try:
            i = graph.index(choice)
        except Exception:
            return GameTrace(
                graph,
                initial,
                tuple(events),
                Outcome.ABORTED,
                diagnostic=f"strategy chose unknown node {choice!r}",
            )
        if i not in legal:
            return GameTrace(
                graph,
                initial,
                tuple(events),
                Outcome.ABORTED,
                diagnostic=f"strategy chose illegal node {choice!r} (value {pos[i]!r})",
            )
        after = fire_index(graph, pos, i)
        events.append(FiringEvent(node=choice, before=pos, after=after, fired_value=pos[i]))
        pos = after


# -- trace export --------------------------------------------------------------

_FMT = "{:.17g}"


def trace_to_csv(trace: GameTrace) -> str:
    """One row per event: index, node, fired_value, then the after-position values."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["index", "node", "fired_value"] + [f"after_{n}" for n in trace.graph.nodes]
    )
    for idx, ev in enumerate(trace.events):
        writer.writerow(
            [idx, ev.node, _FMT.format(ev.fired_value)]
            + [_FMT.format(v) for v in ev.after]
        )
    return buf.getvalue()


def trace_to_json(trace: GameTrace) -> dict:
    """JSON trace document embedding the graph spec."""
    return {
        "schema": "game-trace/1",
        "graph": trace.graph.to_spec(),
        "initial": list(trace.initial),
        "events": [
            {
                "index": idx,
                "node": ev.node,
                "fired_value": ev.fired_value,
                "after": list(ev.after),
            }
            for idx, ev in enumerate(trace.events)
        ],
        "outcome": trace.outcome.value,
        "diagnostic": trace.diagnostic,
    }
