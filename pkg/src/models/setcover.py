# src/models/setcover.py
import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, FrozenSet, List, Tuple

from src.models.pattern import Entry, SparsityPattern
from src.models.system import StructuredSystem
from src.utils.errors import SystemFormatError


class EntryRole(Enum):
    FREE = "*"
    S = "s"


@dataclass(frozen=True)
class SetCoverInstance:
    """Extended set cover: subsets S_1..S_q of {1..p} plus the implicit singletons {1}..{p}"""

    p: int
    subsets: Tuple[FrozenSet[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "subsets", tuple(frozenset(s) for s in self.subsets))
        if self.p < 1:
            raise SystemFormatError("Universe size p must be at least 1")
        if not self.subsets:
            raise SystemFormatError("At least one subset is required")
        for i, subset in enumerate(self.subsets, start=1):
            if not subset:
                raise SystemFormatError(f"Subset S_{i} is empty")
            outside = sorted(e for e in subset if not 1 <= e <= self.p)
            if outside:
                raise SystemFormatError(f"Subset S_{i} holds {outside} outside 1..{self.p}")
        uncovered = sorted(set(range(1, self.p + 1)) - set().union(*self.subsets))
        if uncovered:
            raise SystemFormatError(f"Elements {uncovered} are covered by no subset")

    @property
    def q(self) -> int:
        return len(self.subsets)

    def covers(self, chosen: List[int]) -> bool:
        covered = set()
        for i in chosen:
            covered |= self.subsets[i - 1]
        return len(covered) == self.p

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.p, "subsets": [sorted(s) for s in self.subsets]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SetCoverInstance":
        if not isinstance(data, dict) or "p" not in data or "subsets" not in data:
            raise SystemFormatError("Set cover document needs 'p' and 'subsets'")
        p, subsets = data["p"], data["subsets"]
        if not isinstance(p, int) or isinstance(p, bool):
            raise SystemFormatError(f"Field 'p' must be an integer, got {p!r}")
        if not isinstance(subsets, list) or not all(isinstance(s, list) for s in subsets):
            raise SystemFormatError("Field 'subsets' must be a list of integer lists")
        for i, subset in enumerate(subsets, start=1):
            for k, element in enumerate(subset, start=1):
                if not isinstance(element, int) or isinstance(element, bool):
                    raise SystemFormatError(f"Subset S_{i} element {k} must be an integer, got {element!r}")
            if len(set(subset)) != len(subset):
                raise SystemFormatError(f"Subset S_{i} lists an element twice")
        return cls(p, tuple(frozenset(s) for s in subsets))


def parse_setcover(text: str) -> SetCoverInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SystemFormatError(f"Malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}")
    return SetCoverInstance.from_dict(data)


@dataclass(frozen=True)
class RoleMatrix:
    """Square {0, *, s} pattern"""

    size: int
    roles: Dict[Entry, EntryRole]

    @property
    def pattern(self) -> SparsityPattern:
        return SparsityPattern(self.size, self.size, frozenset(self.roles))

    def role(self, row: int, col: int) -> str:
        entry = self.roles.get((row, col))
        return entry.value if entry else "0"

    def entries_with(self, role: EntryRole) -> List[Entry]:
        return sorted(e for e, r in self.roles.items() if r is role)

    def render(self) -> str:
        return self.pattern.render({e: r.value for e, r in self.roles.items()})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "size": self.size,
            "free": [list(e) for e in self.entries_with(EntryRole.FREE)],
            "s": [list(e) for e in self.entries_with(EntryRole.S)],
        }


@dataclass(frozen=True)
class ReductionOutput:
    """Set cover instance encoded as a sensor placement problem

    `column_permutation[c - 1]` is the column of R(s) that receives column c of M(s).
    `subset_sites[i]` is the state whose measurement selects S_i; `element_states[e]` are the
    two states of the cyclic block standing for universe element e.
    """

    instance: SetCoverInstance
    m_matrix: RoleMatrix
    column_permutation: Tuple[int, ...]
    r_matrix: RoleMatrix
    system: StructuredSystem
    subset_sites: Dict[int, int]
    element_states: Dict[int, Tuple[int, int]]

    @property
    def stage1_states(self) -> List[int]:
        """States measured by C1"""
        return sorted(c for _, c in self.system.C.nonzeros)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "instance": self.instance.to_dict(),
            "M": self.m_matrix.to_dict(),
            "column_permutation": list(self.column_permutation),
            "R": self.r_matrix.to_dict(),
            "system": self.system.to_dict(),
            "subset_sites": {str(i): s for i, s in sorted(self.subset_sites.items())},
            "element_states": {str(e): list(s) for e, s in sorted(self.element_states.items())},
        }
