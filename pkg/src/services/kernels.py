# src/services/kernels.py
"""
Combinatorial kernels on the system digraph: SCCs, θ, ρ, V_ess, Δ0 and Y-reachability.

ρ and the quantities derived from it run on a vertex-split unit-capacity flow network:
each vertex v becomes ("in", v) -> ("out", v), sources hang off "s" and sinks feed "t".
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from src.models.graph import BipartiteGraph, SystemDigraph, Vertex, VertexKind
from src.services.matching import matching_number

logger = logging.getLogger(__name__)

SOURCE = "s"
SINK = "t"
RESIDUAL = "residual"
DELETION = "deletion"
RECOMPUTE = "recompute"


@dataclass(frozen=True)
class SccPartition:
    """Strongly connected components ordered by their lowest vertex, with the condensation DAG"""

    components: Tuple[FrozenSet[Vertex], ...]
    condensation: nx.DiGraph = field(compare=False)
    membership: Dict[Vertex, int] = field(compare=False, repr=False)

    @property
    def sinks(self) -> List[bool]:
        return [self.condensation.out_degree(i) == 0 for i in range(len(self.components))]

    @property
    def sink_components(self) -> List[FrozenSet[Vertex]]:
        return [c for c, sink in zip(self.components, self.sinks) if sink]

    def component_of(self, vertex: Vertex) -> FrozenSet[Vertex]:
        return self.components[self.membership[vertex]]

    def __len__(self) -> int:
        return len(self.components)


def scc_decompose(
    digraph: SystemDigraph, kinds: Optional[Iterable[VertexKind]] = None
) -> SccPartition:
    """Partition the digraph (restricted to `kinds`) into strongly connected components

    Returns:
        SccPartition; component i is a sink iff it has no outgoing condensation edge
    """
    graph = digraph.to_networkx(kinds)
    sccs = sorted(
        (frozenset(c) for c in nx.strongly_connected_components(graph)),
        key=lambda c: min(v.sort_key for v in c),
    )
    membership = {v: i for i, component in enumerate(sccs) for v in component}
    condensation = nx.DiGraph()
    condensation.add_nodes_from(range(len(sccs)))
    condensation.add_edges_from(
        (membership[a], membership[b]) for a, b in graph.edges if membership[a] != membership[b]
    )
    return SccPartition(tuple(sccs), condensation, membership)


def theta(digraph: SystemDigraph, sources: Iterable[Vertex], targets: Iterable[Vertex]) -> int:
    """Maximum number of vertex-disjoint edges from `sources` to `targets`"""
    return matching_number(BipartiteGraph.between(digraph, sources, targets))


class LinkingFlow:
    """Maximum unit-vertex-capacity flow from a source set to a target set"""

    def __init__(
        self,
        digraph: SystemDigraph,
        sources: Iterable[Vertex],
        targets: Iterable[Vertex],
        removed: Iterable[Vertex] = (),
    ):
        self.digraph = digraph
        self.sources = set(sources)
        self.targets = set(targets)
        removed = set(removed)
        network = nx.DiGraph()
        network.add_nodes_from((SOURCE, SINK))
        for v in digraph.vertices:
            if v not in removed:
                network.add_edge(("in", v), ("out", v), capacity=1)
        for tail, head in digraph.edges:
            if tail not in removed and head not in removed:
                network.add_edge(("out", tail), ("in", head), capacity=1)
        for v in self.sources - removed:
            network.add_edge(SOURCE, ("in", v), capacity=1)
        for v in self.targets - removed:
            network.add_edge(("out", v), SINK, capacity=1)
        self.network = network
        self.residual = edmonds_karp(network, SOURCE, SINK, capacity="capacity")
        self.value: int = int(self.residual.graph["flow_value"])

    def carries_flow(self, vertex: Vertex) -> bool:
        edge = self.residual.get_edge_data(("in", vertex), ("out", vertex))
        return edge is not None and edge["flow"] > 0

    def residual_graph(self) -> nx.DiGraph:
        """Arcs with spare capacity"""
        graph = nx.DiGraph()
        graph.add_nodes_from(self.residual.nodes)
        graph.add_edges_from(
            (a, b) for a, b, data in self.residual.edges(data=True) if data["capacity"] - data["flow"] > 0
        )
        return graph


def rho(digraph: SystemDigraph, sources: Iterable[Vertex], targets: Iterable[Vertex]) -> int:
    """Maximum number of vertex-disjoint paths from `sources` to `targets`

    A vertex in both sets counts as a path of length zero.
    """
    return LinkingFlow(digraph, sources, targets).value


def v_ess(
    digraph: SystemDigraph,
    sources: Iterable[Vertex],
    targets: Iterable[Vertex],
    method: str = RESIDUAL,
) -> Set[Vertex]:
    """Vertices covered by every maximum linking from `sources` to `targets`

    Args:
        method: "residual" reads the answer off one maximum flow (a used vertex is essential iff
            its split copies sit in different residual SCCs); "deletion" recomputes ρ with each
            vertex removed

    Returns:
        {v : deleting v strictly decreases ρ}
    """
    sources, targets = set(sources), set(targets)
    flow = LinkingFlow(digraph, sources, targets)
    if method == DELETION:
        return {
            v
            for v in digraph.vertices
            if LinkingFlow(digraph, sources, targets, removed=[v]).value < flow.value
        }
    if method != RESIDUAL:
        raise ValueError(f"Unknown V_ess method '{method}'")
    scc_of: Dict[object, int] = {}
    for i, component in enumerate(nx.strongly_connected_components(flow.residual_graph())):
        for node in component:
            scc_of[node] = i
    return {
        v
        for v in digraph.vertices
        if flow.carries_flow(v) and scc_of[("in", v)] != scc_of[("out", v)]
    }


def delta0(digraph: SystemDigraph, method: str = RESIDUAL) -> Set[Vertex]:
    """States whose addition as a source does not increase ρ(U, Y)

    Args:
        method: "residual" marks x outside Δ0 iff ("in", x) reaches the sink in the residual
            graph of one U→Y flow; "recompute" runs one flow per state
    """
    inputs, outputs = digraph.inputs, digraph.outputs
    if method == RECOMPUTE:
        base = rho(digraph, inputs, outputs)
        return {x for x in digraph.states if rho(digraph, inputs + [x], outputs) == base}
    if method != RESIDUAL:
        raise ValueError(f"Unknown Δ0 method '{method}'")
    flow = LinkingFlow(digraph, inputs, outputs)
    reaches_sink = nx.ancestors(flow.residual_graph(), SINK)
    return {x for x in digraph.states if ("in", x) not in reaches_sink}


def y_reached(digraph: SystemDigraph) -> Set[Vertex]:
    """States and inputs with a directed path to some output"""
    graph = digraph.to_networkx()
    reached: Set[Vertex] = set()
    for output in digraph.outputs:
        reached |= nx.ancestors(graph, output)
    return {v for v in reached if v.kind is not VertexKind.OUTPUT}


def reachable_from(digraph: SystemDigraph, starts: Iterable[Vertex]) -> Set[Vertex]:
    """Vertices reachable from `starts`, the starts included"""
    graph = digraph.to_networkx()
    reached: Set[Vertex] = set()
    for start in starts:
        reached.add(start)
        reached |= nx.descendants(graph, start)
    return reached
