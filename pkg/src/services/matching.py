# src/services/matching.py
"""
Maximum bipartite matching (Hopcroft-Karp) with a set of left vertices that must be matched.

Vertices are scanned in ascending sort_key order unless a seed asks for a shuffled order.
"""
import logging
from collections import deque
from typing import Dict, Iterable, List, Optional, Sequence, Set

import numpy as np

from src.models.graph import BipartiteGraph, Matching, Vertex, labels
from src.utils.errors import InfeasibleError

logger = logging.getLogger(__name__)


class HopcroftKarp:
    """Matching state for one graph: pair maps plus the BFS layering of the current phase"""

    def __init__(self, graph: BipartiteGraph, seed: Optional[int] = None):
        self.graph = graph
        self.rng = np.random.default_rng(seed) if seed is not None else None
        self.adjacency: Dict[Vertex, Sequence[Vertex]] = {
            left: self.ordered(graph.neighbors(left)) for left in graph.left
        }
        self.pair_left: Dict[Vertex, Vertex] = {}
        self.pair_right: Dict[Vertex, Vertex] = {}
        self.dist: Dict[Vertex, int] = {}

    def ordered(self, vertices: Sequence[Vertex]) -> List[Vertex]:
        vertices = list(vertices)
        if self.rng is None:
            return vertices
        return [vertices[i] for i in self.rng.permutation(len(vertices))]

    def _layer(self, lefts: Sequence[Vertex]) -> Optional[int]:
        """BFS from the free left vertices; returns the length of the shortest augmenting path"""
        queue = deque()
        self.dist = {}
        for left in lefts:
            if left not in self.pair_left:
                self.dist[left] = 0
                queue.append(left)
        limit = None
        while queue:
            left = queue.popleft()
            if limit is not None and self.dist[left] >= limit:
                continue
            for right in self.adjacency[left]:
                partner = self.pair_right.get(right)
                if partner is None:
                    if limit is None:
                        limit = self.dist[left] + 1
                elif partner not in self.dist:
                    self.dist[partner] = self.dist[left] + 1
                    queue.append(partner)
        return limit

    def _augment(self, start: Vertex, limit: int) -> bool:
        """Iterative DFS along the BFS layers; flips the first augmenting path found"""
        stack = [(start, iter(self.adjacency[start]))]
        rights: List[Vertex] = []
        while stack:
            left, neighbors = stack[-1]
            level = self.dist[left]
            advanced = False
            for right in neighbors:
                partner = self.pair_right.get(right)
                if partner is None:
                    if level + 1 == limit:
                        rights.append(right)
                        for (path_left, _), path_right in zip(stack, rights):
                            self.pair_left[path_left] = path_right
                            self.pair_right[path_right] = path_left
                        return True
                elif self.dist.get(partner) == level + 1:
                    rights.append(right)
                    stack.append((partner, iter(self.adjacency[partner])))
                    advanced = True
                    break
            if not advanced:
                self.dist[left] = -1  # dead end for this phase
                stack.pop()
                if rights:
                    rights.pop()
        return False

    def run(self, lefts: Sequence[Vertex]) -> None:
        """Grow the matching until no augmenting path starts in `lefts`"""
        while True:
            limit = self._layer(lefts)
            if limit is None:
                return
            for left in lefts:
                if left not in self.pair_left and self.dist.get(left) == 0:
                    self._augment(left, limit)

    def hall_set(self, start: Vertex, lefts: Set[Vertex]) -> List[Vertex]:
        """Left vertices reached from `start` by alternating paths inside `lefts`"""
        reached = {start}
        queue = deque([start])
        while queue:
            left = queue.popleft()
            for right in self.adjacency[left]:
                partner = self.pair_right.get(right)
                if partner is not None and partner in lefts and partner not in reached:
                    reached.add(partner)
                    queue.append(partner)
        return sorted(reached, key=lambda v: v.sort_key)

    def matching(self) -> Matching:
        return Matching(frozenset(self.pair_left.items()))


def max_matching(
    graph: BipartiteGraph, must_match: Iterable[Vertex] = (), seed: Optional[int] = None
) -> Matching:
    """Maximum matching of `graph` that saturates every vertex of `must_match`

    The must-match vertices are matched first; the second phase only augments from the
    remaining free left vertices, so matched vertices stay matched.

    Args:
        graph: Host bipartite graph
        must_match: Left vertices that must end up matched
        seed: When given, shuffles the scan orders (any maximum matching is still valid)

    Returns:
        Maximum-cardinality Matching

    Raises:
        InfeasibleError: If the must-match set violates Hall's condition; `hall_set` names a
            set of must-match vertices with fewer neighbours than members
    """
    solver = HopcroftKarp(graph, seed)
    order = solver.ordered(graph.left)
    must = set(must_match)
    unknown = must - set(graph.left)
    if unknown:
        raise ValueError(f"Must-match vertices {labels(unknown)} are not left vertices")

    must_order = [v for v in order if v in must]
    solver.run(must_order)
    unsaturated = [v for v in must_order if v not in solver.pair_left]
    if unsaturated:
        hall = solver.hall_set(min(unsaturated, key=lambda v: v.sort_key), must)
        neighbours = {r for v in hall for r in graph.neighbors(v)}
        raise InfeasibleError(
            f"Cannot match {', '.join(labels(unsaturated))}: "
            f"{{{', '.join(labels(hall))}}} has only {len(neighbours)} neighbours",
            hall_set=labels(hall),
        )

    solver.run(order)
    result = solver.matching()
    logger.debug(f"Matching of size {result.size} over {len(graph.left)} left vertices")
    return result


def matching_number(graph: BipartiteGraph) -> int:
    return max_matching(graph).size
