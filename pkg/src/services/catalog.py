# src/services/catalog.py
"""
Worked systems with known answers, shared by the tests, the data/ fixtures and the README.
"""
from typing import List

from src.models.pattern import Entry, SparsityPattern, build_output_pattern
from src.models.setcover import SetCoverInstance
from src.models.system import StructuredSystem


def _system(n: int, a: List[Entry], b: List[Entry], q: int = 1) -> StructuredSystem:
    return StructuredSystem.create(
        SparsityPattern.from_entries(n, n, a, name="A"),
        SparsityPattern.from_entries(n, q, b, name="B"),
        dedicated_inputs=True,
    )


def small_plant(with_output: bool = False) -> StructuredSystem:
    """Five states, one input on x1; the optional sensor measures x5

    Stage 1 measures x5, stage 2 adds x1 (total 2); both bound variants give [1, 2].
    """
    system = _system(
        5,
        [(1, 1), (2, 1), (2, 2), (3, 4), (4, 1), (4, 2), (5, 3), (5, 4)],
        [(1, 1)],
    )
    if with_output:
        return StructuredSystem.create(
            system.A, system.B, build_output_pattern([5], 5), dedicated_inputs=True, dedicated_outputs=True
        )
    return system


def selfloop_branch() -> StructuredSystem:
    """Self-loops everywhere; u→x1→x2 branching into the sinks {x3} and {x4, x5}"""
    a = [(i, i) for i in range(1, 6)] + [(2, 1), (3, 2), (4, 2), (5, 4), (4, 5)]
    return _system(5, a, [(1, 1)])


# (h, g): the c state of group h feeds the b state of group g
FOUR_GROUP_CROSS = ((0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3))


def four_group_cover() -> StructuredSystem:
    """Sixteen states in four groups (a, b, c, d), each input driving its group's a state"""
    a: List[Entry] = []
    b: List[Entry] = []
    for g in range(4):
        first = 4 * g + 1
        a += [(first + 1, first), (first + 3, first + 1), (first + 2, first + 2)]
        b.append((first, g + 1))
    a += [(4 * g + 2, 4 * h + 3) for h, g in FOUR_GROUP_CROSS]
    return _system(16, a, b, q=4)


def input_bottleneck(k: int) -> StructuredSystem:
    """k self-looped states funnel into the input-driven x_{k+1}

    Bounds are [k+1, k+2] and the optimum is k+2.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    n = k + 3
    hub, tail, loop = k + 1, k + 2, k + 3
    a = [(i, i) for i in range(1, k + 1)] + [(hub, i) for i in range(1, k + 1)]
    a += [(tail, hub), (loop, loop), (tail, loop)]
    return _system(n, a, [(hub, 1)])


def triangle_cover() -> SetCoverInstance:
    return SetCoverInstance(3, (frozenset({1, 2}), frozenset({2, 3}), frozenset({1, 3})))
