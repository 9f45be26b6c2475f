# src/models/decomposition.py
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from src.models.graph import Matching, Vertex, VertexKind, labels


@dataclass(frozen=True)
class DMComponent:
    """One block of a DM-decomposition

    `index` is 1..k for the consistent middle blocks, 0 for B_0 and None for B_∞.
    """

    index: Optional[int]
    left: FrozenSet[Vertex]
    right: FrozenSet[Vertex]
    has_s_edge: bool = False

    @property
    def label(self) -> str:
        if self.index is None:
            return "B_inf"
        return f"B_{self.index}"

    @property
    def is_empty(self) -> bool:
        return not self.left and not self.right

    @property
    def left_states(self) -> FrozenSet[int]:
        return frozenset(v.index for v in self.left if v.kind is VertexKind.STATE)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "left": labels(self.left),
            "right": labels(self.right),
            "s_edge": self.has_s_edge,
        }


@dataclass(frozen=True)
class DMDecomposition:
    """Ordered blocks [B_0, B_1..B_k, B_∞] plus the ≺ relation among the middle blocks

    `order` holds the direct edges (i, j) of the condensation: some vertex of B_i reaches some
    vertex of B_j in the auxiliary graph, so B_j ≺ B_i. Middle blocks are numbered so that
    every edge points to a smaller index.
    """

    horizontal: DMComponent
    components: Tuple[DMComponent, ...]
    vertical: DMComponent
    order: FrozenSet[Tuple[int, int]]
    matching: Matching
    _downstream: Dict[int, FrozenSet[int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        k = len(self.components)
        for position, component in enumerate(self.components, start=1):
            if component.index != position:
                raise ValueError(f"Component at position {position} carries index {component.index}")
            if len(component.left) != len(component.right):
                raise ValueError(f"{component.label} is not square")
        successors: Dict[int, List[int]] = {i: [] for i in range(1, k + 1)}
        for tail, head in self.order:
            if not head < tail:
                raise ValueError(f"Order edge B_{tail} -> B_{head} breaks the downstream-first numbering")
            successors[tail].append(head)
        # heads carry smaller indices, so one ascending sweep closes the relation
        downstream: Dict[int, FrozenSet[int]] = {}
        for i in range(1, k + 1):
            reach = set()
            for j in successors[i]:
                reach.add(j)
                reach |= downstream[j]
            downstream[i] = frozenset(reach)
        object.__setattr__(self, "_downstream", downstream)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def has_horizontal(self) -> bool:
        return not self.horizontal.is_empty

    @property
    def has_vertical(self) -> bool:
        return not self.vertical.is_empty

    def component(self, index: int) -> DMComponent:
        return self.components[index - 1]

    def downstream(self, index: int) -> FrozenSet[int]:
        """Indices j with B_j ≺ B_index"""
        return self._downstream[index]

    def precedes(self, lower: int, upper: int) -> bool:
        return lower in self._downstream[upper]

    def component_of(self, vertex: Vertex, side: str = "left") -> Optional[DMComponent]:
        """Block holding `vertex` on the given side ("left" or "right")"""
        for component in (self.horizontal, *self.components, self.vertical):
            members = component.left if side == "left" else component.right
            if vertex in members:
                return component
        return None

    @property
    def flagged(self) -> List[int]:
        return [c.index for c in self.components if c.has_s_edge]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "B_0": self.horizontal.to_dict(),
            "components": [c.to_dict() for c in self.components],
            "B_inf": self.vertical.to_dict(),
            "order": sorted([list(edge) for edge in self.order]),
            "matching_size": self.matching.size,
        }


@dataclass(frozen=True)
class SEdgeReport:
    """Middle blocks that contain an s-edge, with the state sets R_i that resolve them"""

    flagged: Tuple[int, ...]
    r_sets: Dict[int, FrozenSet[int]]

    def __post_init__(self):
        if set(self.flagged) != set(self.r_sets):
            raise ValueError("Every flagged component needs exactly one R set")

    @property
    def f_count(self) -> int:
        return len(self.flagged)

    def resolved_by(self, state: int) -> List[int]:
        """Flagged components that a sensor on `state` resolves"""
        return [i for i in self.flagged if state in self.r_sets[i]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "f": self.f_count,
            "flagged": list(self.flagged),
            "R": {str(i): sorted(self.r_sets[i]) for i in self.flagged},
        }
