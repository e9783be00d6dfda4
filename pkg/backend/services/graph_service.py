"""
Graph service for transition graphs, Perron entropy and first-return cycles.
"""
import logging
import math
from typing import List, Optional, Sequence

import networkx as nx
import numpy as np
import scipy.sparse as sp
from networkx.readwrite import json_graph

from shared.config import config
from shared.constants import CYCLE_LABELS, ERRORS, NO_CONTEXT
from shared.exceptions import SpecError
from shared.models import BoxLabel, CycleWord, NetworkSpec, RefinedGraph, TransitionGraph
from backend.services.network_service import NetworkService

logger = logging.getLogger('glassbound.graph')


def as_digraph(g) -> nx.DiGraph:
    """Accept a TransitionGraph, RefinedGraph or bare networkx graph."""
    if isinstance(g, (TransitionGraph, RefinedGraph)):
        return g.graph
    return g


def vertex_name(node) -> str:
    """Display name: the bitstring, subscripted by its context word when present."""
    if isinstance(node, tuple) and len(node) == 2 and isinstance(node[0], BoxLabel):
        box, word = node
        return f"{box}_{word}" if word else str(box)
    return str(node)


class GraphService:
    """Service for graph construction and analysis."""

    @staticmethod
    def build_tg(spec: NetworkSpec) -> TransitionGraph:
        """
        Build the transition graph of a network.

        Args:
            spec: Validated network specification

        Returns:
            TransitionGraph with an edge per exit direction and a self-loop per terminal box
        """
        g = nx.DiGraph()
        for a in spec.boxes():
            g.add_node(a)
        for a in spec.boxes():
            exits = NetworkService.exits(spec, a)
            if not exits:
                g.add_edge(a, a)
            for i in exits:
                g.add_edge(a, a.flip(i))
        logger.debug(f"Built TG with {g.number_of_nodes()} vertices and {g.number_of_edges()} edges")
        return TransitionGraph(g)

    @staticmethod
    def scc_decompose(g) -> List[set]:
        """
        Strongly connected components, ordered by their smallest vertex.
        """
        g = as_digraph(g)
        components = [set(c) for c in nx.strongly_connected_components(g)]
        return sorted(components, key=lambda c: min(c))

    @staticmethod
    def perron_value(g) -> float:
        """
        Perron eigenvalue of the adjacency matrix, taken as the maximum over SCCs.

        Returns:
            Spectral radius; 0 for graphs without cycles
        """
        g = as_digraph(g)
        best = 0.0
        for component in GraphService.scc_decompose(g):
            sub = g.subgraph(component)
            n_edges = sub.number_of_edges()
            if n_edges == 0:
                continue
            if n_edges == len(component):
                # single directed cycle
                best = max(best, 1.0)
                continue
            nodes = sorted(component)
            if len(nodes) < config.DENSE_EIGEN_LIMIT:
                dense = nx.to_numpy_array(sub, nodelist=nodes)
                value = float(np.max(np.abs(np.linalg.eigvals(dense))))
            else:
                value = _shifted_power_iteration(nx.to_scipy_sparse_array(sub, nodelist=nodes, format="csr"))
            best = max(best, value)
        return best

    @staticmethod
    def graph_entropy(g) -> float:
        """
        Entropy of the graph shift, log base 2 of the Perron eigenvalue.

        Args:
            g: Nonempty directed graph

        Returns:
            Nonnegative entropy in bits per symbol
        """
        value = GraphService.perron_value(g)
        return math.log2(value) if value > 1.0 else 0.0

    @staticmethod
    def path_graph(cycle: CycleWord) -> nx.DiGraph:
        """Closed-path subgraph of a cycle, including its starting edge."""
        g = nx.DiGraph()
        g.add_nodes_from(cycle.boxes)
        g.add_edges_from(cycle.edges())
        return g

    @staticmethod
    def enumerate_first_return_cycles(g, starting_edge, max_len: int,
                                      labels: Optional[Sequence[str]] = None) -> List[CycleWord]:
        """
        All first-return cycles through a starting edge with at most max_len edges.

        Walks may revisit vertices but never traverse the starting edge before
        closing.

        Args:
            g: Directed graph (TG or a level-0 refined graph)
            starting_edge: (i(e1), t(e1)) pair of boxes
            max_len: Bound M on the cycle length
            labels: Optional labels in output order

        Returns:
            CycleWords in lexicographic order of their box paths
        """
        g = as_digraph(g)
        u, v = starting_edge
        if not g.has_edge(u, v) and g.has_edge((u, NO_CONTEXT), (v, NO_CONTEXT)):
            u, v = (u, NO_CONTEXT), (v, NO_CONTEXT)
        if not g.has_edge(u, v):
            raise SpecError(f"{ERRORS['UNKNOWN_EDGE']}: {vertex_name(u)}>{vertex_name(v)}")
        if max_len < 1:
            return []
        dist = nx.single_source_shortest_path_length(g.reverse(copy=False), u)

        found = []
        path = [v]

        def walk(node):
            if node == u:
                found.append(tuple(path))
            for w in sorted(g.successors(node)):
                if node == u and w == v:
                    continue
                if w not in dist or len(path) + 1 + dist[w] > max_len:
                    continue
                path.append(w)
                walk(w)
                path.pop()

        if v in dist and 1 + dist[v] <= max_len:
            walk(v)

        def project(node):
            return node[0] if isinstance(node, tuple) else node

        paths = sorted({tuple(project(x) for x in p) for p in found}, key=lambda p: [str(b) for b in p])
        edge = (project(u), project(v))
        cycles = []
        for i, boxes in enumerate(paths):
            if labels is not None and i < len(labels):
                label = labels[i]
            else:
                label = CYCLE_LABELS[i] if i < len(CYCLE_LABELS) else f"c{i}"
            cycles.append(CycleWord(boxes, edge, label))
        logger.info(f"Found {len(cycles)} first-return cycles of length <= {max_len}")
        return cycles

    @staticmethod
    def to_dot(g, name="G", attributes=None) -> str:
        """DOT text with bitstring (and word-subscripted) vertex labels."""
        g = as_digraph(g)
        lines = [f"digraph {name} {{"]
        for key, value in sorted((attributes or {}).items()):
            lines.append(f'  {key}="{value}";')
        for node in sorted(g.nodes):
            lines.append(f'  "{vertex_name(node)}";')
        for a, b in sorted(g.edges):
            lines.append(f'  "{vertex_name(a)}" -> "{vertex_name(b)}";')
        lines.append("}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def to_json(g) -> dict:
        """Node-link adjacency data with string vertex names."""
        g = as_digraph(g)
        named = nx.DiGraph()
        named.add_nodes_from(vertex_name(x) for x in sorted(g.nodes))
        named.add_edges_from((vertex_name(a), vertex_name(b)) for a, b in sorted(g.edges))
        return json_graph.node_link_data(named, edges="edges")

    @staticmethod
    def admissible_in(g, boxes: Sequence[BoxLabel]) -> bool:
        """Whether every consecutive box pair is an edge of the (projected) graph."""
        g = as_digraph(g)
        projected = {(a[0], b[0]) if isinstance(a, tuple) else (a, b) for a, b in g.edges}
        return all((boxes[k], boxes[k + 1]) in projected for k in range(len(boxes) - 1))


def _shifted_power_iteration(adjacency) -> float:
    """Perron value of an irreducible sparse matrix.

    Iterates with I + A, which is primitive whenever A is irreducible, and
    stops when the Collatz-Wielandt bounds agree within EIGEN_TOL.
    """
    n = adjacency.shape[0]
    shifted = (sp.identity(n, format="csr") + adjacency).tocsr()
    x = np.ones(n)
    lower, upper = 0.0, math.inf
    for iteration in range(config.EIGEN_MAX_ITER):
        y = shifted @ x
        ratios = y / x
        lower, upper = float(ratios.min()), float(ratios.max())
        if upper - lower <= config.EIGEN_TOL * upper:
            break
        x = y / y.max()
    else:
        logger.warning(f"Power iteration stopped at {config.EIGEN_MAX_ITER} iterations, "
                       f"bounds [{lower}, {upper}]")
    return 0.5 * (lower + upper) - 1.0
