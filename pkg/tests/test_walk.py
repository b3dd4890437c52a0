import random

import pytest

from c2po.errors import ContractViolationError, InternalError, ValidationError
from c2po.inference import KnowledgeTable, Relation, TableBackend
from c2po.plot_graph import (
    EdgeKind,
    EventNode,
    NodeOrigin,
    StoryGraph,
    WeightedEdge,
    assemble,
    build_backward,
    build_forward,
    build_story_graph,
    build_story_graph_from_texts,
    link_graphs,
)
from c2po.walk import StoryPath, WalkMode, WalkPolicy, enumerate_paths, validate_path, walk
from util import dp_path_count, random_backend, random_plot_texts


def _graph(nodes, edges, plot_points):
    node_map = {
        nid: EventNode(nid, nid, NodeOrigin.PLOT_POINT if nid in plot_points else NodeOrigin.FORWARD_INFERRED, 0)
        for nid in nodes
    }
    edge_list = [WeightedEdge(a, b, w, EdgeKind.FORWARD) for a, b, w in edges]
    return StoryGraph(plot_points, node_map, edge_list, (1, 1), "X")


def _backend(*rows) -> TableBackend:
    table = KnowledgeTable()
    for event, rel, tail, like in rows:
        table.add(event, rel, tail, like)
    return TableBackend(table)


CHAIN = _graph(
    ["p0", "a", "b", "c", "p1"],
    [("p0", "a", 1.0), ("a", "b", 1.0), ("b", "c", 1.0), ("c", "p1", 1.0)],
    ["p0", "p1"],
)

DIAMOND = _graph(
    ["p0", "a", "b", "p1"],
    [("p0", "a", 3.0), ("p0", "b", 1.0), ("a", "p1", 1.0), ("b", "p1", 1.0)],
    ["p0", "p1"],
)


def test_single_path_any_seed():
    for seed in (0, 7, 123456):
        path = walk(CHAIN, WalkPolicy(seed=seed))
        assert path.node_ids == ("p0", "a", "b", "c", "p1")


def test_same_seed_same_path():
    one = walk(DIAMOND, WalkPolicy(seed=99))
    two = walk(DIAMOND, WalkPolicy(seed=99))
    assert one == two


def test_weight_proportional_sampling_ratio():
    heavy = sum(walk(DIAMOND, WalkPolicy(seed=s)).node_ids[1] == "a" for s in range(2000))
    assert 0.70 <= heavy / 2000 <= 0.80


def test_uniform_mode_ignores_weights():
    heavy = sum(
        walk(DIAMOND, WalkPolicy(WalkMode.UNIFORM, seed=s)).node_ids[1] == "a" for s in range(2000)
    )
    assert 0.45 <= heavy / 2000 <= 0.55


def test_walk_rejects_dead_end():
    broken = _graph(
        ["p0", "a", "p1"],
        [("p0", "a", 1.0)],  # a goes nowhere
        ["p0", "p1"],
    )
    with pytest.raises(ContractViolationError):
        # seedless determinism: the only out-edge leads into the dead end
        walk(broken, WalkPolicy(seed=0))


def test_walk_step_budget_guards_internal_bugs():
    with pytest.raises(InternalError):
        walk(CHAIN, WalkPolicy(seed=0, max_steps=2))


def test_max_steps_below_plot_points_rejected():
    with pytest.raises(ValidationError):
        WalkPolicy(seed=0, max_steps=1).resolve_max_steps(CHAIN)


def test_enumerate_diamond():
    paths = enumerate_paths(DIAMOND, limit=10)
    assert [p.node_ids for p in paths] == [("p0", "a", "p1"), ("p0", "b", "p1")]


def test_enumerate_single_path():
    assert [p.node_ids for p in enumerate_paths(CHAIN, 10)] == [("p0", "a", "b", "c", "p1")]


def test_enumerate_respects_limit():
    assert len(enumerate_paths(DIAMOND, 1)) == 1
    with pytest.raises(ValidationError):
        enumerate_paths(DIAMOND, 0)


def test_two_bridges_multiply_path_counts():
    backend = _backend(
        ("a", Relation.WANTS, "x1", 0.6),
        ("a", Relation.WANTS, "x2", 0.4),
        ("x1", Relation.WANTS, "y1", 0.5),
        ("x2", Relation.WANTS, "y1", 0.5),
        ("b", Relation.NEEDS, "y1", 0.9),
        ("b", Relation.WANTS, "z1", 0.6),
        ("b", Relation.WANTS, "z2", 0.4),
        ("z1", Relation.WANTS, "w1", 0.5),
        ("z2", Relation.WANTS, "w1", 0.5),
        ("c", Relation.NEEDS, "w1", 0.9),
    )
    graph = build_story_graph_from_texts(["a", "b", "c"], backend, 2, 1, "X")
    paths = enumerate_paths(graph, 100)
    assert len(paths) == 4
    assert dp_path_count(graph) == 4
    per_bridge = 2 * 2
    assert len(paths) == per_bridge


def test_queen_fixture_paths_and_plot_point_order(fixtures_dir):
    from c2po.extraction import align_plot_points, parse_annotated_story, select_cluster
    from c2po.inference import TableBackend, load_table

    text, clusters, triples = parse_annotated_story((fixtures_dir / "queen.story").read_text())
    outline = align_plot_points(select_cluster(clusters), triples, source_length=len(text))
    backend = TableBackend(load_table(str(fixtures_dir / "queen_table.tsv")))
    graph = build_story_graph(outline, backend, 3, 3)
    assert dp_path_count(graph) == 2  # 2 choices in bridge 0, 1 in bridge 1
    assert len(enumerate_paths(graph, 10)) == 2
    for seed in range(10):
        validate_path(walk(graph, WalkPolicy(seed=seed)), graph)


def test_walked_paths_are_enumerable(mini_outline, mini_backend):
    graph = build_story_graph(mini_outline, mini_backend, 3, 3)
    universe = {p.node_ids for p in enumerate_paths(graph, 100)}
    for seed in range(50):
        assert walk(graph, WalkPolicy(seed=seed)).node_ids in universe


def test_walk_satisfies_path_invariants_random():
    for trial in range(20):
        rng = random.Random(3000 + trial)
        backend = random_backend(rng)
        graph = build_story_graph_from_texts(random_plot_texts(rng), backend, 2, 2, "X")
        for seed in range(25):
            path = walk(graph, WalkPolicy(seed=seed))
            validate_path(path, graph)
            assert len(path.node_ids) <= len(graph.nodes) + 1


def test_story_path_round_trip():
    path = StoryPath(("p0", "a", "p1"), seed=5)
    assert StoryPath.from_json(path.to_json()) == path


def test_product_property_random_graphs():
    """Total path count equals the product of per-bridge counts."""
    for trial in range(10):
        rng = random.Random(4000 + trial)
        backend = random_backend(rng)
        texts = random_plot_texts(rng)
        graph = build_story_graph_from_texts(texts, backend, 2, 2, "X")
        product = 1
        from c2po.plot_graph import build_bridge

        for i in range(len(texts) - 1):
            bridge = build_bridge(texts[i], texts[i + 1], backend, 2, 2, subject="X", index=i)
            sub = StoryGraph([bridge.source_id, bridge.sink_id], bridge.nodes, bridge.edges, bridge.params, "X")
            product *= dp_path_count(sub)
        assert dp_path_count(graph) == product
        assert len(enumerate_paths(graph, 10000)) == min(product, 10000)
