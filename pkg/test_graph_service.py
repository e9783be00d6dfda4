"""
Tests for transition graphs, Perron entropy and first-return cycle enumeration.

Usage:
    pytest test_graph_service.py
"""
import math

import networkx as nx
import numpy as np
import pytest

from backend.services.graph_service import GraphService, _shifted_power_iteration
from backend.services.network_service import NetworkService
from backend.services.refine_service import RefineService
from shared.exceptions import SpecError
from shared.models import BoxLabel


def dense_entropy(g):
    """Brute force: log2 of the spectral radius of the whole adjacency matrix."""
    if g.number_of_edges() == 0:
        return 0.0
    radius = max(abs(np.linalg.eigvals(nx.to_numpy_array(g, nodelist=sorted(g.nodes)))))
    return math.log2(radius) if radius > 1 else 0.0


def exhaustive_cycles(g, u, v, max_len):
    """Every box path v..u of at most max_len boxes avoiding the u->v edge inside."""
    found = set()

    def extend(path):
        if path[-1] == u:
            found.add(tuple(path))
        if len(path) == max_len:
            return
        for w in g.successors(path[-1]):
            if path[-1] == u and w == v:
                continue
            extend(path + [w])

    extend([v])
    return found


def test_tg_of_the_example(spec):
    tg = GraphService.build_tg(spec)
    assert tg.graph.number_of_nodes() == 16
    a, b = BoxLabel.from_string("1111"), BoxLabel.from_string("1110")
    assert tg.graph.has_edge(a, b)
    assert tg.graph.has_edge(a, BoxLabel.from_string("1011"))
    assert GraphService.graph_entropy(tg) == pytest.approx(0.873, abs=1e-3)


def test_all_terminal_network_has_zero_entropy():
    spec = NetworkService.parse_network({
        "n": 2, "lambda": ["1", "1"],
        "gamma": {"00": ["-1", "-1"], "01": ["-1", "1"], "10": ["1", "-1"], "11": ["1", "1"]},
    })
    tg = GraphService.build_tg(spec)
    assert sorted(tg.graph.edges) == [(a, a) for a in spec.boxes()]
    assert tg.edges == {(a, a) for a in tg.vertices}
    assert all(NetworkService.is_terminal(spec, a) for a in spec.boxes())
    assert GraphService.graph_entropy(tg) == 0.0
    assert GraphService.perron_value(tg) == 1.0


def test_entropy_is_the_maximum_over_components():
    g = nx.DiGraph([(0, 1), (1, 0), (0, 0), (2, 3), (3, 2), (1, 2)])
    assert GraphService.perron_value(g) == pytest.approx((1 + math.sqrt(5)) / 2)
    assert len(GraphService.scc_decompose(g)) == 2


def test_acyclic_graph_has_zero_entropy():
    assert GraphService.graph_entropy(nx.DiGraph([(0, 1), (1, 2)])) == 0.0


@pytest.mark.parametrize("seed", range(6))
def test_entropy_matches_dense_spectrum_on_small_graphs(seed):
    rng = np.random.default_rng(seed)
    g = nx.DiGraph()
    g.add_nodes_from(range(8))
    for i in range(8):
        for j in range(8):
            if rng.random() < 0.25:
                g.add_edge(i, j)
    assert GraphService.graph_entropy(g) == pytest.approx(dense_entropy(g), abs=1e-6)
    if g.number_of_edges():
        max_out = max(d for _, d in g.out_degree())
        assert GraphService.graph_entropy(g) <= math.log2(max_out * g.number_of_nodes())


def test_power_iteration_on_a_large_component():
    rng = np.random.default_rng(11)
    g = nx.DiGraph()
    nx.add_cycle(g, range(20))
    g.add_edges_from((i, j) for i in range(20) for j in range(20) if rng.random() < 0.2)
    expected = dense_entropy(g)
    assert GraphService.graph_entropy(g) == pytest.approx(expected, abs=1e-9)
    adjacency = nx.to_scipy_sparse_array(g, nodelist=sorted(g.nodes), format="csr")
    assert _shifted_power_iteration(adjacency) == pytest.approx(2 ** expected, abs=1e-8)


def test_first_return_cycles_contain_a_and_b(spec, edge, cycle_a, cycle_b):
    tg = GraphService.build_tg(spec)
    cycles = GraphService.enumerate_first_return_cycles(tg, edge, 12)
    paths = [c.boxes for c in cycles]
    assert cycle_a.boxes in paths
    assert cycle_b.boxes in paths
    assert paths == sorted(paths, key=lambda p: [str(b) for b in p])
    assert all(c.boxes[0] == edge[1] and c.boxes[-1] == edge[0] for c in cycles)


@pytest.mark.parametrize("max_len", [4, 8, 12])
def test_cycle_enumeration_matches_exhaustive_search(spec, edge, max_len):
    tg = GraphService.build_tg(spec)
    u, v = edge
    expected = exhaustive_cycles(tg.graph, u, v, max_len)
    found = {c.boxes for c in GraphService.enumerate_first_return_cycles(tg, edge, max_len)}
    assert found == expected


def test_cycles_of_the_cycle_union_graph(trap, edge):
    g = RefineService.build_tgr(trap)
    cycles = GraphService.enumerate_first_return_cycles(g, edge, 12)
    assert len(cycles) == 4
    assert all(isinstance(b, BoxLabel) for c in cycles for b in c.boxes)


def test_unknown_starting_edge(spec):
    tg = GraphService.build_tg(spec)
    edge = (BoxLabel.from_string("1111"), BoxLabel.from_string("0111"))
    with pytest.raises(SpecError, match="starting edge"):
        GraphService.enumerate_first_return_cycles(tg, edge, 12)


def test_path_graph_closes_the_cycle(cycle_a, edge):
    g = GraphService.path_graph(cycle_a)
    assert g.number_of_nodes() == 8
    assert g.number_of_edges() == 8
    assert g.has_edge(*edge)
    assert GraphService.graph_entropy(g) == 0.0


def test_exports(trap):
    g = RefineService.build_tgr(trap)
    dot = GraphService.to_dot(g, "TG_r", {"entropy": "0.224"})
    assert dot.startswith("digraph TG_r {")
    assert '"1111" -> "1110";' in dot
    data = GraphService.to_json(g)
    assert len(data["nodes"]) == 11
    assert {"source": "1111", "target": "1110"} in [
        {"source": e["source"], "target": e["target"]} for e in data["edges"]]


def test_admissible_in(trap, cycle_a, cycle_b):
    g = RefineService.build_tgr(trap)
    assert GraphService.admissible_in(g, list(cycle_a.boxes) + list(cycle_b.boxes))
    assert not GraphService.admissible_in(g, [BoxLabel.from_string("1111"), BoxLabel.from_string("1011")])
