# src/models/pattern.py
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from src.utils.errors import SystemFormatError

Entry = Tuple[int, int]


class Axis(Enum):
    ROWS = "rows"
    COLUMNS = "columns"


@dataclass(frozen=True)
class SparsityPattern:
    """Zero/nonzero structure of a structured matrix, 1-indexed"""

    rows: int
    cols: int
    nonzeros: FrozenSet[Entry] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise SystemFormatError(
                f"Pattern dimensions must be non-negative, got {self.rows}x{self.cols}"
            )
        object.__setattr__(self, "nonzeros", frozenset(self.nonzeros))
        for r, c in self.nonzeros:
            if not (1 <= r <= self.rows and 1 <= c <= self.cols):
                raise SystemFormatError(
                    f"Entry [{r}, {c}] out of bounds for a {self.rows}x{self.cols} pattern"
                )

    @classmethod
    def from_entries(
        cls, rows: int, cols: int, entries: Iterable[Sequence[int]], name: str = "M"
    ) -> "SparsityPattern":
        """Build a pattern from an entry list, rejecting duplicates

        Args:
            rows: Row count
            cols: Column count
            entries: 1-based (row, col) pairs
            name: Matrix name used in error messages

        Returns:
            The validated pattern

        Raises:
            SystemFormatError: On malformed, out-of-bounds or duplicate entries
        """
        seen: Set[Entry] = set()
        for position, entry in enumerate(entries, start=1):
            if (
                not isinstance(entry, (list, tuple))
                or len(entry) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in entry)
            ):
                raise SystemFormatError(
                    f"{name} entry #{position} must be a pair of integers, got {entry!r}"
                )
            r, c = int(entry[0]), int(entry[1])
            if not (1 <= r <= rows and 1 <= c <= cols):
                raise SystemFormatError(
                    f"{name} entry #{position} [{r}, {c}] out of bounds for {rows}x{cols}"
                )
            if (r, c) in seen:
                raise SystemFormatError(f"{name} entry #{position} [{r}, {c}] is a duplicate")
            seen.add((r, c))
        return cls(rows, cols, frozenset(seen))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SparsityPattern":
        return cls(rows, cols, frozenset())

    @classmethod
    def identity(cls, n: int) -> "SparsityPattern":
        return cls(n, n, frozenset((i, i) for i in range(1, n + 1)))

    @property
    def nnz(self) -> int:
        """Number of free parameters"""
        return len(self.nonzeros)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def has(self, row: int, col: int) -> bool:
        return (row, col) in self.nonzeros

    def entries(self) -> List[Entry]:
        """Nonzeros in row-major order"""
        return sorted(self.nonzeros)

    def row_support(self, row: int) -> List[int]:
        return sorted(c for r, c in self.nonzeros if r == row)

    def col_support(self, col: int) -> List[int]:
        return sorted(r for r, c in self.nonzeros if c == col)

    def transpose(self) -> "SparsityPattern":
        return SparsityPattern(self.cols, self.rows, frozenset((c, r) for r, c in self.nonzeros))

    def vstack(self, other: "SparsityPattern") -> "SparsityPattern":
        """Stack another pattern below this one, [self; other]"""
        if other.cols != self.cols:
            raise SystemFormatError(
                f"Cannot stack a {other.rows}x{other.cols} pattern under {self.rows}x{self.cols}"
            )
        shifted = frozenset((r + self.rows, c) for r, c in other.nonzeros)
        return SparsityPattern(self.rows + other.rows, self.cols, self.nonzeros | shifted)

    def is_dedicated(self, axis: Axis) -> bool:
        """Check that every line along `axis` holds exactly one nonzero and no two lines share
        the orthogonal index"""
        if axis is Axis.ROWS:
            lines = [self.row_support(r) for r in range(1, self.rows + 1)]
        else:
            lines = [self.col_support(c) for c in range(1, self.cols + 1)]
        if any(len(line) != 1 for line in lines):
            return False
        used = [line[0] for line in lines]
        return len(set(used)) == len(used)

    def to_dense(self) -> np.ndarray:
        """Boolean matrix with True at the free entries"""
        dense = np.zeros((self.rows, self.cols), dtype=bool)
        for r, c in self.nonzeros:
            dense[r - 1, c - 1] = True
        return dense

    def to_list(self) -> List[List[int]]:
        return [[r, c] for r, c in self.entries()]

    def render(self, symbols: Optional[Dict[Entry, str]] = None) -> str:
        """Text grid with `*` for free entries and `0` elsewhere"""
        symbols = symbols or {}
        lines = []
        for r in range(1, self.rows + 1):
            cells = []
            for c in range(1, self.cols + 1):
                if (r, c) in self.nonzeros:
                    cells.append(symbols.get((r, c), "*"))
                else:
                    cells.append("0")
            lines.append(" ".join(cells))
        return "\n".join(lines)

    def __str__(self) -> str:
        return f"SparsityPattern({self.rows}x{self.cols}, nnz={self.nnz})"


def build_output_pattern(measured_states: Iterable[int], n: int) -> SparsityPattern:
    """Dedicated sensor matrix with one row per measured state

    Args:
        measured_states: State indices (1-based) to measure
        n: Number of states

    Returns:
        A |states| x n pattern, rows ordered by ascending state index

    Raises:
        SystemFormatError: On duplicate or out-of-range indices
    """
    states = list(measured_states)
    if len(set(states)) != len(states):
        raise SystemFormatError(f"Duplicate measured state in {sorted(states)}")
    for index in states:
        if not 1 <= index <= n:
            raise SystemFormatError(f"Measured state {index} out of range 1..{n}")
    ordered = sorted(states)
    return SparsityPattern(
        len(ordered), n, frozenset((row, state) for row, state in enumerate(ordered, start=1))
    )


def is_dedicated(pattern: SparsityPattern, axis: Axis) -> bool:
    return pattern.is_dedicated(axis)
