# src/models/placement.py
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Tuple

from src.models.pattern import SparsityPattern, build_output_pattern
from src.models.system import StructuredSystem


class SensorStage(Enum):
    STAGE1 = "stage1"
    STAGE2 = "stage2"
    EXTRA = "extra"


class BoundsVariant(Enum):
    DEDICATED = "dedicated"
    DIRECT_MEASURE = "direct-measure"


def sensor_key(kind: str, index: int) -> str:
    return f"{kind}{index}"


@dataclass(frozen=True)
class PlacementResult:
    """Dedicated sensors chosen by a solver, with the stage that placed each one"""

    measured_states: Tuple[int, ...] = ()
    measured_inputs: Tuple[int, ...] = ()
    stage_tags: Dict[str, SensorStage] = field(default_factory=dict)
    method: str = ""

    def __post_init__(self):
        """Validate placement data after initialization"""
        object.__setattr__(self, "measured_states", tuple(sorted(self.measured_states)))
        object.__setattr__(self, "measured_inputs", tuple(sorted(self.measured_inputs)))
        if len(set(self.measured_states)) != len(self.measured_states):
            raise ValueError(f"State measured twice in {list(self.measured_states)}")
        if len(set(self.measured_inputs)) != len(self.measured_inputs):
            raise ValueError(f"Input measured twice in {list(self.measured_inputs)}")
        if any(i < 1 for i in self.measured_states + self.measured_inputs):
            raise ValueError("Sensor indices are 1-based")
        if set(self.stage_tags) != set(self.sensor_keys):
            raise ValueError("Stage tags must cover exactly the placed sensors")

    @classmethod
    def create(
        cls,
        stages: Dict[SensorStage, Iterable[int]],
        inputs: Optional[Dict[SensorStage, Iterable[int]]] = None,
        method: str = "",
    ) -> "PlacementResult":
        """Create a placement from per-stage index lists"""
        states: List[int] = []
        measured_inputs: List[int] = []
        tags: Dict[str, SensorStage] = {}
        for stage, indices in stages.items():
            for i in indices:
                states.append(i)
                tags[sensor_key("x", i)] = stage
        for stage, indices in (inputs or {}).items():
            for j in indices:
                measured_inputs.append(j)
                tags[sensor_key("u", j)] = stage
        return cls(tuple(states), tuple(measured_inputs), tags, method)

    @property
    def sensor_keys(self) -> List[str]:
        return [sensor_key("x", i) for i in self.measured_states] + [
            sensor_key("u", j) for j in self.measured_inputs
        ]

    @property
    def total_count(self) -> int:
        return len(self.measured_states) + len(self.measured_inputs)

    def states_in(self, stage: SensorStage) -> List[int]:
        return [i for i in self.measured_states if self.stage_tags[sensor_key("x", i)] is stage]

    def stage_counts(self) -> Dict[str, int]:
        counts = {stage.value: 0 for stage in SensorStage}
        for stage in self.stage_tags.values():
            counts[stage.value] += 1
        return counts

    def extend(
        self, states: Iterable[int] = (), inputs: Iterable[int] = (), stage: SensorStage = SensorStage.STAGE2
    ) -> "PlacementResult":
        states, inputs = list(states), list(inputs)
        tags = dict(self.stage_tags)
        tags.update({sensor_key("x", i): stage for i in states})
        tags.update({sensor_key("u", j): stage for j in inputs})
        return PlacementResult(
            self.measured_states + tuple(states),
            self.measured_inputs + tuple(inputs),
            tags,
            self.method,
        )

    def output_pattern(self, n: int) -> SparsityPattern:
        """C rows of the measured states"""
        return build_output_pattern(self.measured_states, n)

    def apply_to(self, system: StructuredSystem) -> StructuredSystem:
        """System with this placement appended to its outputs"""
        return system.with_sensors(self.measured_states, self.measured_inputs)

    def to_dict(self) -> Dict[str, Any]:
        """Convert placement to dictionary for reports"""
        return {
            "method": self.method,
            "measured_states": list(self.measured_states),
            "measured_inputs": list(self.measured_inputs),
            "stage_tags": {key: self.stage_tags[key].value for key in self.sensor_keys},
            "stage_counts": self.stage_counts(),
            "total": self.total_count,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PlacementResult":
        """Create placement from dictionary"""
        result = cls(
            measured_states=tuple(data.get("measured_states", [])),
            measured_inputs=tuple(data.get("measured_inputs", [])),
            stage_tags={key: SensorStage(value) for key, value in data["stage_tags"].items()},
            method=data.get("method", ""),
        )
        if "total" in data and data["total"] != result.total_count:
            raise ValueError(f"Total {data['total']} does not match {result.total_count} sensors")
        return result

    def __str__(self) -> str:
        return (
            f"PlacementResult(method={self.method or '-'}, "
            f"states={list(self.measured_states)}, "
            f"inputs={list(self.measured_inputs)}, "
            f"total={self.total_count})"
        )


@dataclass(frozen=True)
class MinObsResult:
    """Minimum dedicated sensors for structural observability of a state matrix"""

    count: int
    witness: Tuple[int, ...]
    n: int
    matching_size: int
    sink_count: int
    assignable: int

    def __post_init__(self):
        object.__setattr__(self, "witness", tuple(sorted(self.witness)))
        deficiency = self.n - self.matching_size
        if not 0 <= self.assignable <= min(deficiency, self.sink_count):
            raise ValueError(
                f"Assignable sinks {self.assignable} outside 0..min({deficiency}, {self.sink_count})"
            )
        if self.count != deficiency + self.sink_count - self.assignable:
            raise ValueError("Count must equal deficiency plus unassigned sink components")
        if len(self.witness) != self.count:
            raise ValueError(f"Witness has {len(self.witness)} sensors, expected {self.count}")

    @property
    def deficiency(self) -> int:
        return self.n - self.matching_size

    def to_dict(self) -> Dict[str, Any]:
        return {
            "H": self.count,
            "witness": list(self.witness),
            "n": self.n,
            "matching_size": self.matching_size,
            "deficiency": self.deficiency,
            "sink_sccs": self.sink_count,
            "assignable": self.assignable,
        }


@dataclass(frozen=True)
class BoundsResult:
    """Integer interval holding the optimum, with a feasible placement certifying the upper end"""

    lower: int
    upper: int
    witness: PlacementResult
    variant: BoundsVariant
    h_value: int
    q: int
    n: int

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper <= self.n:
            raise ValueError(f"Bounds [{self.lower}, {self.upper}] are not ordered within 0..{self.n}")
        if self.upper - self.lower > self.q:
            raise ValueError(f"Interval [{self.lower}, {self.upper}] wider than q={self.q}")
        if self.witness.total_count > self.upper:
            raise ValueError(
                f"Witness with {self.witness.total_count} sensors exceeds the upper bound {self.upper}"
            )

    @property
    def witness_size(self) -> int:
        return self.witness.total_count

    def contains(self, value: int) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant.value,
            "lower": self.lower,
            "upper": self.upper,
            "H": self.h_value,
            "q": self.q,
            "witness_size": self.witness_size,
            "witness": self.witness.to_dict(),
        }
