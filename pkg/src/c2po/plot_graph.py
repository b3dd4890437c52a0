"""Plot-graph construction.

For each adjacent plot-point pair, a forward DAG of wants-inferences grows
out of the first point and a backward DAG of needs-inferences grows into
the second. The two are joined by weighted link edges (one argmax link per
forward frontier node), dead branches are pruned so every surviving node
lies on a source-to-sink path, and the per-pair bridges are unioned into
the story graph that random walks traverse.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field

from .errors import (
    AssemblyError,
    ContractViolationError,
    GraphFormatError,
    TransportError,
    ValidationError,
)
from .extraction import PlotOutline
from .inference import Relation, normalize_event

FALLBACK_WEIGHT = 1e-9


class NodeOrigin(enum.Enum):
    PLOT_POINT = "plot_point"
    FORWARD_INFERRED = "forward_inferred"
    BACKWARD_INFERRED = "backward_inferred"


class EdgeKind(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    LINK = "link"


@dataclass(frozen=True)
class EventNode:
    id: str
    text: str
    origin: NodeOrigin
    depth: int
    subject: str = ""


@dataclass(frozen=True)
class WeightedEdge:
    src: str
    dst: str
    weight: float
    kind: EdgeKind

    def __post_init__(self):
        if self.weight <= 0:
            raise ValidationError(f"edge {self.src}->{self.dst} has non-positive weight {self.weight}")


@dataclass
class DirectedDag:
    """One half of a bridge: root plus inferred expansions.

    Forward DAGs point away from the root; backward DAGs point toward it
    (a node's needs-inference is its predecessor). Node ids follow BFS
    creation order, which makes rebuilds bit-identical.
    """

    root_id: str
    nodes: dict[str, EventNode]
    edges: list[WeightedEdge]
    forward: bool
    k: int
    n: int

    def frontier_ids(self) -> list[str]:
        """Nodes at maximum depth n plus unexpandable leaves, in id order."""
        expansions: dict[str, int] = {nid: 0 for nid in self.nodes}
        for e in self.edges:
            expanded = e.src if self.forward else e.dst
            expansions[expanded] += 1
        return [
            nid for nid, node in self.nodes.items()
            if node.depth >= self.n or expansions[nid] == 0
        ]


def _grow(event: str, backend, k: int, n: int, relation: Relation,
          subject: str, prefix: str, origin: NodeOrigin) -> DirectedDag:
    if k < 1 or n < 1:
        raise ValidationError(f"k and n must be >= 1, got k={k}, n={n}")
    root_id = f"{prefix}0"
    root = EventNode(root_id, event, NodeOrigin.PLOT_POINT, 0, subject)
    nodes: dict[str, EventNode] = {root_id: root}
    by_norm: dict[str, str] = {normalize_event(event): root_id}
    edges: list[WeightedEdge] = []
    edge_keys: set[tuple[str, str]] = set()
    queue: deque[str] = deque([root_id])
    counter = 1
    forward = relation is Relation.WANTS

    while queue:
        nid = queue.popleft()
        node = nodes[nid]
        if node.depth >= n:
            continue
        try:
            response = backend.infer(node.text, relation, k)
        except TransportError as exc:
            raise TransportError(f"{exc} ({relation.value} expansion stalled at depth {node.depth})") from exc
        for cand in response.candidates:
            key = normalize_event(cand.tail)
            existing = by_norm.get(key)
            if existing is not None:
                # Reuse the node; only deeper targets keep the graph acyclic.
                if nodes[existing].depth <= node.depth:
                    continue
                src, dst = (nid, existing) if forward else (existing, nid)
                if (src, dst) in edge_keys:
                    continue
                edges.append(WeightedEdge(src, dst, cand.likelihood, EdgeKind.FORWARD if forward else EdgeKind.BACKWARD))
                edge_keys.add((src, dst))
                continue
            cid = f"{prefix}{counter}"
            counter += 1
            nodes[cid] = EventNode(cid, cand.tail, origin, node.depth + 1, subject)
            by_norm[key] = cid
            src, dst = (nid, cid) if forward else (cid, nid)
            edges.append(WeightedEdge(src, dst, cand.likelihood, EdgeKind.FORWARD if forward else EdgeKind.BACKWARD))
            edge_keys.add((src, dst))
            queue.append(cid)
    return DirectedDag(root_id, nodes, edges, forward, k, n)


def build_forward(event: str, backend, k: int, n: int, subject: str = "") -> DirectedDag:
    """Grow the wants-DAG out of a plot point, k wide and n deep."""
    return _grow(event, backend, k, n, Relation.WANTS, subject, "f", NodeOrigin.FORWARD_INFERRED)


def build_backward(event: str, backend, k: int, n: int, subject: str = "") -> DirectedDag:
    """Grow the needs-DAG into a plot point; edges point toward it."""
    return _grow(event, backend, k, n, Relation.NEEDS, subject, "b", NodeOrigin.BACKWARD_INFERRED)


def _pair_weight(wants_u, needs_v, anchor_u: float, anchor_v: float,
                 u_text: str, v_text: str) -> float | None:
    p_wants = wants_u.likelihood_of(v_text)
    p_needs = needs_v.likelihood_of(u_text)
    if p_wants is None and p_needs is None:
        return None
    weight = 0.0
    if p_wants is not None:
        weight += p_wants / anchor_u
    if p_needs is not None:
        weight += p_needs / anchor_v
    return weight


def link_weight(u: EventNode, v: EventNode, backend) -> float | None:
    """Link weight between a forward node u and a backward node v.

    The wants term scores v as a continuation of u and the needs term
    scores u as a precondition of v, each divided by the backend's
    anchor-token likelihood. Returns None when both directional
    probabilities are missing (the pair is unlinkable); a single missing
    term contributes 0.
    """
    return _pair_weight(
        backend.infer(u.text, Relation.WANTS),
        backend.infer(v.text, Relation.NEEDS),
        backend.anchor_probability(u.text, Relation.WANTS),
        backend.anchor_probability(v.text, Relation.NEEDS),
        u.text,
        v.text,
    )


@dataclass(frozen=True)
class LinkPolicy:
    link_all_nodes: bool = False
    fallback_weight: float = FALLBACK_WEIGHT


@dataclass
class BridgeGraph:
    """The linked forward/backward pair between two adjacent plot points."""

    source_id: str
    sink_id: str
    nodes: dict[str, EventNode]
    edges: list[WeightedEdge]
    params: tuple[int, int]  # (k, n)

    def __post_init__(self):
        topological_order(self.nodes, self.edges)  # raises on a cycle

    def out_edges(self, nid: str) -> list[WeightedEdge]:
        return [e for e in self.edges if e.src == nid]

    def link_edges(self) -> list[WeightedEdge]:
        return [e for e in self.edges if e.kind is EdgeKind.LINK]


def topological_order(nodes: dict[str, EventNode], edges: list[WeightedEdge]) -> list[str]:
    """Kahn's algorithm; raises ValidationError if the graph has a cycle."""
    indeg = {nid: 0 for nid in nodes}
    succ: dict[str, list[str]] = {nid: [] for nid in nodes}
    for e in edges:
        indeg[e.dst] += 1
        succ[e.src].append(e.dst)
    ready = deque(nid for nid in nodes if indeg[nid] == 0)
    order = []
    while ready:
        nid = ready.popleft()
        order.append(nid)
        for nxt in succ[nid]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
    if len(order) != len(nodes):
        raise ValidationError("graph contains a cycle")
    return order


def link_graphs(gf: DirectedDag, gb: DirectedDag, backend,
                policy: LinkPolicy = LinkPolicy(), index: int = 0) -> BridgeGraph:
    """Join a forward and a backward DAG into one bridge.

    Every forward frontier node (or every forward node under
    ``link_all_nodes``) gets one link edge to the backward node maximizing
    the pair weight; ties prefer lexicographically smaller text, then
    smaller depth. Frontier nodes with no linkable partner are left for
    pruning. If no link is found anywhere, a single fallback edge joins
    source to sink directly so the bridge stays traversable.
    """
    if not gf.forward or gb.forward:
        raise ValidationError("link_graphs expects (forward DAG, backward DAG)")

    source_id, sink_id = f"p{index}", f"p{index + 1}"

    def rename_f(nid: str) -> str:
        return source_id if nid == gf.root_id else f"br{index}.{nid}"

    def rename_b(nid: str) -> str:
        return sink_id if nid == gb.root_id else f"br{index}.{nid}"

    nodes: dict[str, EventNode] = {}
    for nid, node in gf.nodes.items():
        new = rename_f(nid)
        nodes[new] = EventNode(new, node.text, node.origin, node.depth, node.subject)
    for nid, node in gb.nodes.items():
        new = rename_b(nid)
        nodes[new] = EventNode(new, node.text, node.origin, node.depth, node.subject)
    edges = [WeightedEdge(rename_f(e.src), rename_f(e.dst), e.weight, e.kind) for e in gf.edges]
    edges += [WeightedEdge(rename_b(e.src), rename_b(e.dst), e.weight, e.kind) for e in gb.edges]

    link_sources = list(gf.nodes) if policy.link_all_nodes else gf.frontier_ids()

    # One backend query per node, shared across all pair evaluations.
    wants = {nid: backend.infer(gf.nodes[nid].text, Relation.WANTS) for nid in link_sources}
    anchors_w = {nid: backend.anchor_probability(gf.nodes[nid].text, Relation.WANTS) for nid in link_sources}
    needs = {nid: backend.infer(node.text, Relation.NEEDS) for nid, node in gb.nodes.items()}
    anchors_n = {nid: backend.anchor_probability(node.text, Relation.NEEDS) for nid, node in gb.nodes.items()}

    linked = False
    for uid in link_sources:
        u = gf.nodes[uid]
        best: tuple[float, str, int, str] | None = None
        for vid, v in gb.nodes.items():
            w = _pair_weight(wants[uid], needs[vid], anchors_w[uid], anchors_n[vid], u.text, v.text)
            if w is None:
                continue
            cand = (-w, v.text, v.depth, vid)
            if best is None or cand < best:
                best = cand
        if best is not None:
            neg_w, _, _, vid = best
            edges.append(WeightedEdge(rename_f(uid), rename_b(vid), -neg_w, EdgeKind.LINK))
            linked = True
    if not linked:
        edges.append(WeightedEdge(source_id, sink_id, policy.fallback_weight, EdgeKind.LINK))
    return BridgeGraph(source_id, sink_id, nodes, edges, (gf.k, gf.n))


def prune_dead_ends(bridge: BridgeGraph) -> BridgeGraph:
    """Drop every node and edge not on a source-to-sink path. Idempotent."""
    succ: dict[str, list[str]] = {nid: [] for nid in bridge.nodes}
    pred: dict[str, list[str]] = {nid: [] for nid in bridge.nodes}
    for e in bridge.edges:
        succ[e.src].append(e.dst)
        pred[e.dst].append(e.src)

    def reach(start: str, adj: dict[str, list[str]]) -> set[str]:
        seen = {start}
        queue = deque([start])
        while queue:
            for nxt in adj[queue.popleft()]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    keep = reach(bridge.source_id, succ) & reach(bridge.sink_id, pred)
    if bridge.source_id not in keep or bridge.sink_id not in keep:
        raise ContractViolationError("bridge has no source-to-sink path")
    nodes = {nid: node for nid, node in bridge.nodes.items() if nid in keep}
    edges = [e for e in bridge.edges if e.src in keep and e.dst in keep]
    return BridgeGraph(bridge.source_id, bridge.sink_id, nodes, edges, bridge.params)


def build_bridge(p1_text: str, p2_text: str, backend, k: int, n: int,
                 subject: str = "", index: int = 0,
                 policy: LinkPolicy = LinkPolicy(), prune: bool = True) -> BridgeGraph:
    """Forward DAG + backward DAG + linking (+ pruning) for one pair."""
    gf = build_forward(p1_text, backend, k, n, subject)
    gb = build_backward(p2_text, backend, k, n, subject)
    bridge = link_graphs(gf, gb, backend, policy, index=index)
    return prune_dead_ends(bridge) if prune else bridge


@dataclass
class StoryGraph:
    """Union of all bridges in outline order; the random-walk search space."""

    plot_point_ids: list[str]
    nodes: dict[str, EventNode]
    edges: list[WeightedEdge]
    params: tuple[int, int]
    character: str = ""
    bridge_params: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        topological_order(self.nodes, self.edges)
        self._succ: dict[str, list[WeightedEdge]] = {nid: [] for nid in self.nodes}
        for e in self.edges:
            self._succ[e.src].append(e)

    def out_edges(self, nid: str) -> list[WeightedEdge]:
        return self._succ[nid]

    @property
    def source_id(self) -> str:
        return self.plot_point_ids[0]

    @property
    def sink_id(self) -> str:
        return self.plot_point_ids[-1]

    def to_json(self) -> str:
        def bridge_of(nid: str) -> int | None:
            if nid.startswith("br"):
                return int(nid[2:].split(".", 1)[0])
            return None

        doc = {
            "character": self.character,
            "plot_points": list(self.plot_point_ids),
            "nodes": [
                {"id": n.id, "text": n.text, "origin": n.origin.value, "depth": n.depth, "bridge": bridge_of(n.id)}
                for n in self.nodes.values()
            ],
            "edges": [
                {"from": e.src, "to": e.dst, "weight": e.weight, "kind": e.kind.value}
                for e in self.edges
            ],
            "params": {"k": self.params[0], "n": self.params[1]},
            "bridges": [{"k": k, "n": n} for k, n in self.bridge_params],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "StoryGraph":
        try:
            doc = json.loads(text)
            character = doc.get("character", "")
            nodes = {}
            for n in doc["nodes"]:
                nodes[n["id"]] = EventNode(n["id"], n["text"], NodeOrigin(n["origin"]), n["depth"], character)
            edges = [
                WeightedEdge(e["from"], e["to"], e["weight"], EdgeKind(e["kind"]))
                for e in doc["edges"]
            ]
            params = (doc["params"]["k"], doc["params"]["n"])
            bridge_params = [(b["k"], b["n"]) for b in doc.get("bridges", [])]
            plot_points = list(doc["plot_points"])
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphFormatError(f"bad story-graph document: {exc}") from exc
        if not plot_points or any(p not in nodes for p in plot_points):
            raise GraphFormatError("plot_points refer to unknown node ids")
        return cls(plot_points, nodes, edges, params, character, bridge_params)

    def to_dot(self) -> str:
        def esc(s: str) -> str:
            return s.replace("\\", "\\\\").replace('"', '\\"')

        lines = ["digraph story {", "  rankdir=LR;"]
        for node in self.nodes.values():
            shape = "doublecircle" if node.origin is NodeOrigin.PLOT_POINT else "ellipse"
            lines.append(f'  "{esc(node.id)}" [label="{esc(node.text)}", shape={shape}];')
        for e in self.edges:
            style = ", style=dashed" if e.kind is EdgeKind.LINK else ""
            lines.append(f'  "{esc(e.src)}" -> "{esc(e.dst)}" [label="{e.weight:.4g}"{style}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def assemble(bridges: list[BridgeGraph], character: str = "") -> StoryGraph:
    """Union the bridges, merging each shared plot-point node."""
    if not bridges:
        raise AssemblyError("no bridges to assemble")
    nodes: dict[str, EventNode] = {}
    edges: list[WeightedEdge] = []
    plot_points = [bridges[0].source_id]
    for i, bridge in enumerate(bridges):
        if bridge.source_id != plot_points[-1]:
            raise AssemblyError(
                f"bridge {i} starts at {bridge.source_id!r}, expected {plot_points[-1]!r}"
            )
        shared = nodes.get(bridge.source_id)
        incoming = bridge.nodes[bridge.source_id]
        if shared is not None and normalize_event(shared.text) != normalize_event(incoming.text):
            raise AssemblyError(
                f"bridge {i} source text {incoming.text!r} does not match previous sink {shared.text!r}"
            )
        nodes.update(bridge.nodes)
        edges.extend(bridge.edges)
        plot_points.append(bridge.sink_id)
    return StoryGraph(
        plot_points,
        nodes,
        edges,
        bridges[0].params,
        character,
        [b.params for b in bridges],
    )


def build_story_graph_from_texts(texts: list[str], backend, k: int, n: int,
                                 character: str = "",
                                 policy: LinkPolicy = LinkPolicy()) -> StoryGraph:
    """One pruned bridge per adjacent pair of plot texts, assembled."""
    if len(texts) < 2:
        raise AssemblyError(f"need at least 2 plot points, got {len(texts)}")
    bridges = [
        build_bridge(texts[i], texts[i + 1], backend, k, n,
                     subject=character, index=i, policy=policy)
        for i in range(len(texts) - 1)
    ]
    return assemble(bridges, character)


def build_story_graph(outline: PlotOutline, backend, k: int, n: int,
                      policy: LinkPolicy = LinkPolicy()) -> StoryGraph:
    """Full pipeline stage: expand and bridge an extracted outline."""
    texts = [p.triple.phrase for p in outline.points]
    return build_story_graph_from_texts(texts, backend, k, n, outline.character, policy)
