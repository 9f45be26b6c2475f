# src/services/dm.py
"""
Dulmage-Mendelsohn decomposition on the auxiliary graph of a maximum matching.

The auxiliary graph carries every edge left -> right and every matching edge again right -> left.
B_0 is what unmatched left vertices reach, B_∞ is what reaches unmatched right vertices, and the
middle blocks are the strongly connected components of the rest.
"""
import heapq
import logging
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

import networkx as nx

from src.models.decomposition import DMComponent, DMDecomposition, SEdgeReport
from src.models.graph import BipartiteGraph, Matching, Vertex
from src.services.matching import max_matching

logger = logging.getLogger(__name__)

Node = Tuple[str, Vertex]


def auxiliary_graph(graph: BipartiteGraph, matching: Matching) -> nx.DiGraph:
    aux = nx.DiGraph()
    aux.add_nodes_from(("l", v) for v in graph.left)
    aux.add_nodes_from(("r", v) for v in graph.right)
    aux.add_edges_from((("l", e.left), ("r", e.right)) for e in graph.edges)
    aux.add_edges_from((("r", right), ("l", left)) for left, right in matching.pairs)
    return aux


def _block(index: Optional[int], nodes, s_pairs: Set[Tuple[Vertex, Vertex]]) -> DMComponent:
    left = frozenset(v for side, v in nodes if side == "l")
    right = frozenset(v for side, v in nodes if side == "r")
    has_s_edge = any(l in left and r in right for l, r in s_pairs)
    return DMComponent(index, left, right, has_s_edge)


def dm_decompose(
    graph: BipartiteGraph, matching: Optional[Matching] = None, seed: Optional[int] = None
) -> DMDecomposition:
    """Decompose `graph` into B_0, the consistent blocks B_1..B_k and B_∞

    Middle blocks are numbered downstream-first: a block gets its index once every block it
    reaches is numbered, and among the ready blocks the one holding the lowest right vertex
    (states before outputs) goes first.

    Args:
        graph: Bipartite graph, with s-flags when built as B'(A,B,C)
        matching: Maximum matching to decompose along; computed when omitted
        seed: Shuffles the computed matching (the partition does not depend on it)

    Returns:
        DMDecomposition
    """
    matching = matching if matching is not None else max_matching(graph, seed=seed)
    aux = auxiliary_graph(graph, matching)
    s_pairs = {(e.left, e.right) for e in graph.s_edges}

    unmatched_left = [("l", v) for v in matching.unmatched_left(graph)]
    unmatched_right = [("r", v) for v in matching.unmatched_right(graph)]
    horizontal: Set[Node] = set(unmatched_left)
    for node in unmatched_left:
        horizontal |= nx.descendants(aux, node)
    vertical: Set[Node] = set(unmatched_right)
    for node in unmatched_right:
        vertical |= nx.ancestors(aux, node)
    if horizontal & vertical:
        raise ValueError("Matching is not maximum: B_0 and B_inf overlap")

    rest = aux.subgraph(n for n in aux.nodes if n not in horizontal and n not in vertical)
    sccs = [frozenset(c) for c in nx.strongly_connected_components(rest)]
    membership = {node: i for i, scc in enumerate(sccs) for node in scc}
    successors: Dict[int, Set[int]] = {i: set() for i in range(len(sccs))}
    predecessors: Dict[int, Set[int]] = {i: set() for i in range(len(sccs))}
    for a, b in rest.edges:
        ca, cb = membership[a], membership[b]
        if ca != cb:
            successors[ca].add(cb)
            predecessors[cb].add(ca)

    def key(i: int):
        return min(v.sort_key for side, v in sccs[i] if side == "r")

    remaining = {i: len(successors[i]) for i in successors}
    ready = [(key(i), i) for i, count in remaining.items() if count == 0]
    heapq.heapify(ready)
    index_of: Dict[int, int] = {}
    while ready:
        _, i = heapq.heappop(ready)
        index_of[i] = len(index_of) + 1
        for p in predecessors[i]:
            remaining[p] -= 1
            if remaining[p] == 0:
                heapq.heappush(ready, (key(p), p))

    components = sorted(
        (_block(index_of[i], scc, s_pairs) for i, scc in enumerate(sccs)), key=lambda c: c.index
    )
    order = frozenset(
        (index_of[a], index_of[b]) for a, targets in successors.items() for b in targets
    )
    decomposition = DMDecomposition(
        horizontal=_block(0, horizontal, s_pairs),
        components=tuple(components),
        vertical=_block(None, vertical, s_pairs),
        order=order,
        matching=matching,
    )
    logger.debug(
        f"DM decomposition: |B_0|={len(horizontal)}, k={decomposition.k}, "
        f"|B_inf|={len(vertical)}, flagged={decomposition.flagged}"
    )
    return decomposition


def s_edge_report(decomposition: DMDecomposition) -> SEdgeReport:
    """Flagged middle blocks and, for each, the states R_i whose measurement resolves it"""
    flagged = tuple(decomposition.flagged)
    r_sets: Dict[int, FrozenSet[int]] = {}
    for i in flagged:
        states = set(decomposition.component(i).left_states)
        for j in decomposition.downstream(i):
            states |= decomposition.component(j).left_states
        r_sets[i] = frozenset(states)
    return SEdgeReport(flagged, r_sets)


def partition_signature(decomposition: DMDecomposition) -> List[Tuple[tuple, tuple, bool]]:
    """Matching-independent view of a decomposition, used to compare runs"""
    blocks = [decomposition.horizontal, *decomposition.components, decomposition.vertical]
    return sorted(
        (
            tuple(sorted(v.sort_key for v in b.left)),
            tuple(sorted(v.sort_key for v in b.right)),
            b.has_s_edge,
        )
        for b in blocks
    )
