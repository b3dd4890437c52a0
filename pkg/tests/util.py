"""Shared builders and independent oracles for the test suite.

Oracles here deliberately avoid the code paths they check: link weights
are recomputed straight off the knowledge-table entries, and reachability
questions go through networkx.
"""

from __future__ import annotations

import random

import networkx as nx

from c2po.inference import KnowledgeTable, Relation, TableBackend
from c2po.plot_graph import BridgeGraph, DirectedDag, EdgeKind, StoryGraph


def as_nx(graph) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(graph.nodes)
    g.add_edges_from((e.src, e.dst) for e in graph.edges)
    return g


def random_table(rng: random.Random, n_events: int = 10, max_candidates: int = 3,
                 coverage: float = 0.8, saturated: bool = False) -> KnowledgeTable:
    """A random knowledge table over a small shared vocabulary.

    ``saturated`` gives every (event, relation) exactly ``max_candidates``
    candidates so expansions always branch at full width.
    """
    vocab = [f"event {i}" for i in range(n_events)]
    table = KnowledgeTable()
    for event in vocab:
        for relation in (Relation.WANTS, Relation.NEEDS):
            if not saturated and rng.random() > coverage:
                continue
            width = max_candidates if saturated else rng.randint(1, max_candidates)
            tails = rng.sample(vocab, min(width, len(vocab)))
            anchor = round(rng.uniform(0.1, 1.0), 3) if rng.random() < 0.5 else None
            for tail in tails:
                table.add(event, relation, tail, round(rng.uniform(0.05, 1.0), 3), anchor)
    return table


def random_backend(rng: random.Random, **kwargs) -> TableBackend:
    return TableBackend(random_table(rng, **kwargs))


def random_plot_texts(rng: random.Random, n_events: int = 10) -> list[str]:
    count = rng.randint(2, 5)
    return rng.sample([f"event {i}" for i in range(n_events)], count)


def _norm(text: str) -> str:
    # Re-stated normalization rule, kept independent of the implementation.
    return " ".join(text.lower().split()).rstrip(".!?").strip()


def oracle_pair_weight(table: KnowledgeTable, u_text: str, v_text: str) -> float | None:
    """Link weight recomputed by direct table reads."""
    wants = table.entries.get((_norm(u_text), Relation.WANTS))
    needs = table.entries.get((_norm(v_text), Relation.NEEDS))
    p_wants = None
    if wants is not None:
        for c in wants.candidates:
            if _norm(c.tail) == _norm(v_text):
                p_wants = c.likelihood
                break
    p_needs = None
    if needs is not None:
        for c in needs.candidates:
            if _norm(c.tail) == _norm(u_text):
                p_needs = c.likelihood
                break
    if p_wants is None and p_needs is None:
        return None
    weight = 0.0
    if p_wants is not None:
        anchor_u = wants.anchor_likelihood if wants is not None else 1.0
        weight += p_wants / anchor_u
    if p_needs is not None:
        anchor_v = needs.anchor_likelihood if needs is not None else 1.0
        weight += p_needs / anchor_v
    return weight


def oracle_links(table: KnowledgeTable, gf: DirectedDag, gb: DirectedDag) -> set[tuple[str, str]]:
    """Brute-force argmax link per forward frontier node, as (u_text, v_text)."""
    expanded = {e.src for e in gf.edges}
    frontier = [nid for nid, node in gf.nodes.items() if node.depth >= gf.n or nid not in expanded]
    links = set()
    for uid in frontier:
        u = gf.nodes[uid]
        best_key, best_text = None, None
        for vid, v in gb.nodes.items():
            w = oracle_pair_weight(table, u.text, v.text)
            if w is None:
                continue
            key = (-w, v.text, v.depth, vid)
            if best_key is None or key < best_key:
                best_key, best_text = key, v.text
        if best_key is not None:
            links.add((u.text, best_text))
    return links


def bridge_links(bridge: BridgeGraph) -> set[tuple[str, str]]:
    return {
        (bridge.nodes[e.src].text, bridge.nodes[e.dst].text)
        for e in bridge.edges
        if e.kind is EdgeKind.LINK
    }


def dp_path_count(graph: StoryGraph) -> int:
    """Path count by dynamic programming over a topological order."""
    order = list(nx.topological_sort(as_nx(graph)))
    counts = {nid: 0 for nid in graph.nodes}
    counts[graph.sink_id] = 1
    succ: dict[str, list[str]] = {nid: [] for nid in graph.nodes}
    for e in graph.edges:
        succ[e.src].append(e.dst)
    for nid in reversed(order):
        if nid != graph.sink_id:
            counts[nid] = sum(counts[s] for s in succ[nid])
    return counts[graph.source_id]
