# src/models/system.py
import json
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, Optional

from src.models.pattern import Axis, SparsityPattern, build_output_pattern
from src.utils.errors import SystemFormatError


@dataclass(frozen=True)
class StructuredSystem:
    """Structured system (A, B, C, D): x' = Ax + Bu, y = Cx + Du

    Flags record the dedication assumptions the caller relies on; they are checked, not inferred.
    """

    A: SparsityPattern
    B: SparsityPattern
    C: SparsityPattern
    D: SparsityPattern
    dedicated_inputs: bool = False
    dedicated_outputs: bool = False

    def __post_init__(self):
        n = self.A.rows
        if n < 1:
            raise SystemFormatError("A system needs at least one state (n >= 1)")
        if self.A.cols != n:
            raise SystemFormatError(f"A must be square, got {self.A.rows}x{self.A.cols}")
        if self.B.rows != n:
            raise SystemFormatError(f"B must have {n} rows, got {self.B.rows}")
        if self.C.cols != n:
            raise SystemFormatError(f"C must have {n} columns, got {self.C.cols}")
        if self.D.shape != (self.C.rows, self.B.cols):
            raise SystemFormatError(
                f"D must be {self.C.rows}x{self.B.cols}, got {self.D.rows}x{self.D.cols}"
            )
        if self.dedicated_inputs and self.q and not self.B.is_dedicated(Axis.COLUMNS):
            raise SystemFormatError("B is flagged dedicated but some input drives several states")
        if self.dedicated_outputs and any(
            len(self.C.row_support(r)) > 1 for r in range(1, self.m + 1)
        ):
            raise SystemFormatError("C is flagged dedicated but some sensor measures several states")

    @classmethod
    def create(
        cls,
        A: SparsityPattern,
        B: Optional[SparsityPattern] = None,
        C: Optional[SparsityPattern] = None,
        D: Optional[SparsityPattern] = None,
        dedicated_inputs: bool = False,
        dedicated_outputs: bool = False,
    ) -> "StructuredSystem":
        """Create a system, filling missing blocks with zero patterns"""
        n = A.rows
        B = B if B is not None else SparsityPattern.zeros(n, 0)
        C = C if C is not None else SparsityPattern.zeros(0, n)
        D = D if D is not None else SparsityPattern.zeros(C.rows, B.cols)
        return cls(A, B, C, D, dedicated_inputs, dedicated_outputs)

    @property
    def n(self) -> int:
        return self.A.rows

    @property
    def q(self) -> int:
        return self.B.cols

    @property
    def m(self) -> int:
        return self.C.rows

    @property
    def input_driven_states(self) -> FrozenSet[int]:
        """The set I of states hit by some input"""
        return frozenset(r for r, _ in self.B.nonzeros)

    def input_target(self, input_index: int) -> int:
        """State driven by a dedicated input"""
        rows = self.B.col_support(input_index)
        if len(rows) != 1:
            raise SystemFormatError(f"Input u{input_index} does not drive exactly one state")
        return rows[0]

    def without_outputs(self) -> "StructuredSystem":
        return StructuredSystem.create(
            self.A, self.B, dedicated_inputs=self.dedicated_inputs
        )

    def with_sensors(
        self, states: Iterable[int] = (), inputs: Iterable[int] = ()
    ) -> "StructuredSystem":
        """Append dedicated sensor rows: first on states (ascending), then on inputs

        Returns:
            New system whose C (and D) carry the extra rows under the existing ones
        """
        states = sorted(states)
        inputs = sorted(inputs)
        for j in inputs:
            if not 1 <= j <= self.q:
                raise SystemFormatError(f"Measured input {j} out of range 1..{self.q}")
        c_extra = build_output_pattern(states, self.n).vstack(
            SparsityPattern.zeros(len(inputs), self.n)
        )
        d_extra = SparsityPattern(
            len(states) + len(inputs),
            self.q,
            frozenset((len(states) + row, j) for row, j in enumerate(inputs, start=1)),
        )
        return StructuredSystem(
            self.A,
            self.B,
            self.C.vstack(c_extra),
            self.D.vstack(d_extra),
            self.dedicated_inputs,
            self.dedicated_outputs,
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "n": self.n,
            "q": self.q,
            "m": self.m,
            "A": self.A.to_list(),
            "B": self.B.to_list(),
            "C": self.C.to_list(),
        }
        if self.D.nnz:
            data["D"] = self.D.to_list()
        if self.dedicated_inputs:
            data["dedicated_inputs"] = True
        if self.dedicated_outputs:
            data["dedicated_outputs"] = True
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StructuredSystem":
        if not isinstance(data, dict):
            raise SystemFormatError("System document must be a JSON object")
        dims = {}
        for key in ("n", "q", "m"):
            if key not in data:
                raise SystemFormatError(f"Missing required field '{key}'")
            value = data[key]
            if not isinstance(value, int) or isinstance(value, bool):
                raise SystemFormatError(f"Field '{key}' must be an integer, got {value!r}")
            dims[key] = value
        n, q, m = dims["n"], dims["q"], dims["m"]
        if n < 1 or q < 0 or m < 0:
            raise SystemFormatError(f"Dimension mismatch: need n >= 1, q >= 0, m >= 0 (n={n}, q={q}, m={m})")

        blocks = {}
        for key, rows, cols in (("A", n, n), ("B", n, q), ("C", m, n), ("D", m, q)):
            entries = data.get(key, [])
            if key != "D" and key not in data:
                raise SystemFormatError(f"Missing required field '{key}'")
            if not isinstance(entries, list):
                raise SystemFormatError(f"Field '{key}' must be a list of [row, col] pairs")
            blocks[key] = SparsityPattern.from_entries(rows, cols, entries, name=key)

        flags = {}
        for key in ("dedicated_inputs", "dedicated_outputs"):
            value = data.get(key, False)
            if not isinstance(value, bool):
                raise SystemFormatError(f"Field '{key}' must be true or false, got {value!r}")
            flags[key] = value

        return cls(
            blocks["A"],
            blocks["B"],
            blocks["C"],
            blocks["D"],
            dedicated_inputs=flags["dedicated_inputs"],
            dedicated_outputs=flags["dedicated_outputs"],
        )


def parse_system(text: str) -> StructuredSystem:
    """Parse a JSON system document

    Args:
        text: Document following {"n","q","m","A","B","C","D"?}

    Returns:
        Validated StructuredSystem

    Raises:
        SystemFormatError: With the 1-based position of the offending entry or character
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SystemFormatError(f"Malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}")
    return StructuredSystem.from_dict(data)


def serialize_system(system: StructuredSystem) -> str:
    return json.dumps(system.to_dict(), indent=2)
