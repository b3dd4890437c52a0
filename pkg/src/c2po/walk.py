"""Story generation as seeded random walks over a pruned story graph.

Walks never restart or backtrack: pruning guarantees every node reaches
the final plot point, so a walk simply samples out-edges until it lands
on the sink. An exhaustive path enumerator doubles as generation mode and
test oracle.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass

from .errors import ContractViolationError, GraphFormatError, InternalError, ValidationError
from .plot_graph import StoryGraph


class WalkMode(enum.Enum):
    WEIGHT_PROPORTIONAL = "weighted"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class WalkPolicy:
    mode: WalkMode = WalkMode.WEIGHT_PROPORTIONAL
    seed: int = 0
    max_steps: int | None = None  # None resolves to node count + 1

    def resolve_max_steps(self, graph: StoryGraph) -> int:
        if self.max_steps is None:
            return len(graph.nodes) + 1
        if self.max_steps < len(graph.plot_point_ids):
            raise ValidationError(
                f"max_steps {self.max_steps} below plot-point count {len(graph.plot_point_ids)}"
            )
        return self.max_steps


@dataclass(frozen=True)
class StoryPath:
    node_ids: tuple[str, ...]
    seed: int

    def to_json(self) -> str:
        return json.dumps({"seed": self.seed, "node_ids": list(self.node_ids)}, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "StoryPath":
        try:
            doc = json.loads(text)
            return cls(tuple(doc["node_ids"]), doc["seed"])
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphFormatError(f"bad story-path document: {exc}") from exc


def validate_path(path: StoryPath, graph: StoryGraph) -> None:
    """Check start, end, edge connectivity, and plot-point order."""
    ids = path.node_ids
    if not ids or ids[0] != graph.source_id or ids[-1] != graph.sink_id:
        raise ContractViolationError("path does not run from the first to the last plot point")
    edge_set = {(e.src, e.dst) for e in graph.edges}
    for a, b in zip(ids, ids[1:]):
        if (a, b) not in edge_set:
            raise ContractViolationError(f"path step {a!r} -> {b!r} is not an edge")
    visited_points = [nid for nid in ids if nid in set(graph.plot_point_ids)]
    if visited_points != list(graph.plot_point_ids):
        raise ContractViolationError("path does not visit every plot point in order")


def walk(graph: StoryGraph, policy: WalkPolicy) -> StoryPath:
    """One seeded random walk from the first plot point to the last.

    Out-edges are sampled proportionally to weight (or uniformly), in a
    fixed order keyed by target id, so a (graph, seed) pair always yields
    the same path.
    """
    rng = random.Random(policy.seed)
    budget = policy.resolve_max_steps(graph)
    current = graph.source_id
    ids = [current]
    while current != graph.sink_id:
        out = sorted(graph.out_edges(current), key=lambda e: e.dst)
        if not out:
            raise ContractViolationError(
                f"dead end at {current!r}: walk requires a pruned graph"
            )
        if len(out) == 1:
            chosen = out[0]
        else:
            if policy.mode is WalkMode.UNIFORM:
                weights = [1.0] * len(out)
            else:
                weights = [e.weight for e in out]
            total = sum(weights)
            r = rng.random() * total
            acc = 0.0
            chosen = out[-1]
            for e, w in zip(out, weights):
                acc += w
                if r < acc:
                    chosen = e
                    break
        current = chosen.dst
        ids.append(current)
        if len(ids) > budget:
            raise InternalError(f"walk exceeded {budget} steps; graph invariants are broken")
    return StoryPath(tuple(ids), policy.seed)


def enumerate_paths(graph: StoryGraph, limit: int) -> list[StoryPath]:
    """All source-to-sink paths in lexicographic node-id order, up to limit."""
    if limit < 1:
        raise ValidationError(f"limit must be >= 1, got {limit}")
    paths: list[StoryPath] = []
    stack: list[str] = [graph.source_id]

    def visit(nid: str) -> bool:
        if nid == graph.sink_id:
            paths.append(StoryPath(tuple(stack), seed=0))
            return len(paths) >= limit
        for e in sorted(graph.out_edges(nid), key=lambda e: e.dst):
            stack.append(e.dst)
            done = visit(e.dst)
            stack.pop()
            if done:
                return True
        return False

    visit(graph.source_id)
    return paths
