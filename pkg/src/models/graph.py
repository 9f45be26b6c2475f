# src/models/graph.py
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Tuple

import networkx as nx

from src.models.pattern import SparsityPattern
from src.models.system import StructuredSystem


class VertexKind(Enum):
    STATE = "x"
    INPUT = "u"
    OUTPUT = "y"

    @property
    def rank(self) -> int:
        """Ordering used for every deterministic scan: states, then inputs, then outputs"""
        return {VertexKind.STATE: 0, VertexKind.INPUT: 1, VertexKind.OUTPUT: 2}[self]


class Vertex(NamedTuple):
    kind: VertexKind
    index: int

    @property
    def label(self) -> str:
        return f"{self.kind.value}{self.index}"

    @property
    def sort_key(self) -> Tuple[int, int]:
        return self.kind.rank, self.index

    def __str__(self) -> str:
        return self.label


def x(index: int) -> Vertex:
    return Vertex(VertexKind.STATE, index)


def u(index: int) -> Vertex:
    return Vertex(VertexKind.INPUT, index)


def y(index: int) -> Vertex:
    return Vertex(VertexKind.OUTPUT, index)


def sorted_vertices(vertices: Iterable[Vertex]) -> List[Vertex]:
    return sorted(vertices, key=lambda v: v.sort_key)


def labels(vertices: Iterable[Vertex]) -> List[str]:
    return [v.label for v in sorted_vertices(vertices)]


@dataclass(frozen=True)
class SystemDigraph:
    """Digraph G(V, E) of a structured system, V = X ∪ U ∪ Y"""

    n: int
    q: int
    m: int
    edges: FrozenSet[Tuple[Vertex, Vertex]]
    _successors: Dict[Vertex, Tuple[Vertex, ...]] = field(init=False, repr=False, compare=False)
    _predecessors: Dict[Vertex, Tuple[Vertex, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        successors: Dict[Vertex, List[Vertex]] = {v: [] for v in self.vertices}
        predecessors: Dict[Vertex, List[Vertex]] = {v: [] for v in self.vertices}
        for tail, head in self.edges:
            if tail.kind is VertexKind.OUTPUT or head.kind is VertexKind.INPUT:
                raise ValueError(f"Edge {tail.label}->{head.label} leaves an output or enters an input")
            successors[tail].append(head)
            predecessors[head].append(tail)
        object.__setattr__(
            self, "_successors", {v: tuple(sorted_vertices(s)) for v, s in successors.items()}
        )
        object.__setattr__(
            self, "_predecessors", {v: tuple(sorted_vertices(p)) for v, p in predecessors.items()}
        )

    @classmethod
    def from_system(cls, system: StructuredSystem) -> "SystemDigraph":
        return cls.from_patterns(system.A, system.B, system.C, system.D)

    @classmethod
    def from_patterns(
        cls,
        A: SparsityPattern,
        B: Optional[SparsityPattern] = None,
        C: Optional[SparsityPattern] = None,
        D: Optional[SparsityPattern] = None,
    ) -> "SystemDigraph":
        n = A.rows
        q = B.cols if B is not None else 0
        m = C.rows if C is not None else 0
        edges = {(x(j), x(i)) for i, j in A.nonzeros}
        if B is not None:
            edges |= {(u(j), x(i)) for i, j in B.nonzeros}
        if C is not None:
            edges |= {(x(j), y(i)) for i, j in C.nonzeros}
        if D is not None:
            edges |= {(u(j), y(i)) for i, j in D.nonzeros}
        return cls(n, q, m, frozenset(edges))

    @property
    def states(self) -> List[Vertex]:
        return [x(i) for i in range(1, self.n + 1)]

    @property
    def inputs(self) -> List[Vertex]:
        return [u(j) for j in range(1, self.q + 1)]

    @property
    def outputs(self) -> List[Vertex]:
        return [y(k) for k in range(1, self.m + 1)]

    @property
    def vertices(self) -> List[Vertex]:
        return self.states + self.inputs + self.outputs

    def successors(self, vertex: Vertex) -> Tuple[Vertex, ...]:
        return self._successors[vertex]

    def predecessors(self, vertex: Vertex) -> Tuple[Vertex, ...]:
        return self._predecessors[vertex]

    def to_networkx(self, kinds: Optional[Iterable[VertexKind]] = None) -> nx.DiGraph:
        """networkx view, optionally restricted to some vertex classes"""
        keep = set(kinds) if kinds is not None else set(VertexKind)
        graph = nx.DiGraph()
        graph.add_nodes_from(v for v in self.vertices if v.kind in keep)
        graph.add_edges_from(
            (tail, head) for tail, head in self.edges if tail.kind in keep and head.kind in keep
        )
        return graph


@dataclass(frozen=True)
class BipartiteEdge:
    left: Vertex
    right: Vertex
    structural: bool = True
    s_edge: bool = False


@dataclass(frozen=True)
class BipartiteGraph:
    """Bipartite graph (V^l, V^r, E'), with s-flags on the diagonal state edges of B'"""

    left: Tuple[Vertex, ...]
    right: Tuple[Vertex, ...]
    edges: Tuple[BipartiteEdge, ...]
    _adjacency: Dict[Vertex, Tuple[Vertex, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(sorted_vertices(set(self.left))))
        object.__setattr__(self, "right", tuple(sorted_vertices(set(self.right))))
        left_set, right_set = set(self.left), set(self.right)
        adjacency: Dict[Vertex, List[Vertex]] = {v: [] for v in self.left}
        seen = set()
        for edge in self.edges:
            if edge.left not in left_set or edge.right not in right_set:
                raise ValueError(f"Edge {edge.left.label}->{edge.right.label} leaves the vertex sets")
            if (edge.left, edge.right) in seen:
                raise ValueError(f"Parallel edge {edge.left.label}->{edge.right.label}")
            seen.add((edge.left, edge.right))
            adjacency[edge.left].append(edge.right)
        object.__setattr__(
            self, "_adjacency", {v: tuple(sorted_vertices(rs)) for v, rs in adjacency.items()}
        )

    @classmethod
    def from_system(cls, system: StructuredSystem, with_s_edges: bool = False) -> "BipartiteGraph":
        """B(A,B,C), or B'(A,B,C) when `with_s_edges` is set

        A self-loop A(i,i) and the s-edge (x_i^l, x_i^r) collapse into one edge carrying both roles.
        """
        n, q, m = system.n, system.q, system.m
        left = [x(i) for i in range(1, n + 1)] + [u(j) for j in range(1, q + 1)]
        right = [x(i) for i in range(1, n + 1)] + [y(k) for k in range(1, m + 1)]
        edges: Dict[Tuple[Vertex, Vertex], BipartiteEdge] = {}
        for i, j in system.A.nonzeros:
            edges[(x(j), x(i))] = BipartiteEdge(x(j), x(i), structural=True, s_edge=False)
        for i, j in system.B.nonzeros:
            edges[(u(j), x(i))] = BipartiteEdge(u(j), x(i))
        for i, j in system.C.nonzeros:
            edges[(x(j), y(i))] = BipartiteEdge(x(j), y(i))
        for i, j in system.D.nonzeros:
            edges[(u(j), y(i))] = BipartiteEdge(u(j), y(i))
        if with_s_edges:
            for i in range(1, n + 1):
                structural = (x(i), x(i)) in edges
                edges[(x(i), x(i))] = BipartiteEdge(x(i), x(i), structural=structural, s_edge=True)
        return cls(tuple(left), tuple(right), tuple(edges.values()))

    @classmethod
    def from_pattern(cls, pattern: SparsityPattern) -> "BipartiteGraph":
        """Columns on the left, rows on the right"""
        left = [x(c) for c in range(1, pattern.cols + 1)]
        right = [x(r) for r in range(1, pattern.rows + 1)]
        edges = [BipartiteEdge(x(c), x(r)) for r, c in pattern.entries()]
        return cls(tuple(left), tuple(right), tuple(edges))

    @classmethod
    def between(
        cls, digraph: SystemDigraph, sources: Iterable[Vertex], targets: Iterable[Vertex]
    ) -> "BipartiteGraph":
        """Edges of `digraph` running from `sources` to `targets`, one side each"""
        sources, targets = set(sources), set(targets)
        edges = [
            BipartiteEdge(tail, head)
            for tail, head in digraph.edges
            if tail in sources and head in targets
        ]
        return cls(tuple(sources), tuple(targets), tuple(edges))

    def neighbors(self, vertex: Vertex) -> Tuple[Vertex, ...]:
        return self._adjacency[vertex]

    @property
    def s_edges(self) -> List[BipartiteEdge]:
        return [e for e in self.edges if e.s_edge]


@dataclass(frozen=True)
class Matching:
    """Set of vertex-disjoint (left, right) edges"""

    pairs: FrozenSet[Tuple[Vertex, Vertex]]
    _by_left: Dict[Vertex, Vertex] = field(init=False, repr=False, compare=False)
    _by_right: Dict[Vertex, Vertex] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_left: Dict[Vertex, Vertex] = {}
        by_right: Dict[Vertex, Vertex] = {}
        for left, right in self.pairs:
            if left in by_left or right in by_right:
                raise ValueError(f"Vertex reused in matching edge {left.label}->{right.label}")
            by_left[left] = right
            by_right[right] = left
        object.__setattr__(self, "_by_left", by_left)
        object.__setattr__(self, "_by_right", by_right)

    @property
    def size(self) -> int:
        return len(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def left_matched(self) -> FrozenSet[Vertex]:
        return frozenset(self._by_left)

    @property
    def right_matched(self) -> FrozenSet[Vertex]:
        return frozenset(self._by_right)

    def partner_of_left(self, vertex: Vertex) -> Optional[Vertex]:
        return self._by_left.get(vertex)

    def partner_of_right(self, vertex: Vertex) -> Optional[Vertex]:
        return self._by_right.get(vertex)

    def unmatched_left(self, graph: BipartiteGraph) -> List[Vertex]:
        return [v for v in graph.left if v not in self._by_left]

    def unmatched_right(self, graph: BipartiteGraph) -> List[Vertex]:
        return [v for v in graph.right if v not in self._by_right]

    def is_left_perfect(self, graph: BipartiteGraph) -> bool:
        return len(self._by_left) == len(graph.left)

    def belongs_to(self, graph: BipartiteGraph) -> bool:
        """Every matching edge exists in `graph`"""
        left_set = set(graph.left)
        return all(
            left in left_set and right in graph.neighbors(left) for left, right in self.pairs
        )
