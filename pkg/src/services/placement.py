# src/services/placement.py
import logging
from itertools import combinations
from typing import List, Optional, Set, Tuple

from src.config.settings import get_settings
from src.models.graph import BipartiteGraph, VertexKind
from src.models.placement import PlacementResult, SensorStage
from src.models.system import StructuredSystem
from src.services.dm import dm_decompose, s_edge_report
from src.services.matching import max_matching
from src.services.verify import is_gsio
from src.utils.errors import CapExceededError, GsioError, InfeasibleError, PreconditionError

logger = logging.getLogger(__name__)


def measured_states(system: StructuredSystem) -> Set[int]:
    return {c for _, c in system.C.nonzeros}


def stage1_placement(system: StructuredSystem) -> PlacementResult:
    """Fewest dedicated sensors that make B(A,B,C1) left-perfectly matchable

    The sensors sit on the state vertices left unmatched by the input-saturating matching.

    Raises:
        InfeasibleError: If grank(B) < q
    """
    base = system.without_outputs()
    graph = BipartiteGraph.from_system(base)
    inputs = [v for v in graph.left if v.kind is VertexKind.INPUT]
    try:
        matching = max_matching(graph, must_match=inputs)
    except InfeasibleError as e:
        logger.error(f"Stage 1 refused: {e}")
        raise InfeasibleError(f"grank(B) < q: {e}", hall_set=e.hall_set) from e
    sensors = [v.index for v in matching.unmatched_left(graph)]
    logger.info(f"Stage 1 places {len(sensors)} sensor(s): {sensors}")
    return PlacementResult.create({SensorStage.STAGE1: sensors}, method="stage1")


def _greedy_incremental(system: StructuredSystem) -> List[int]:
    report = s_edge_report(dm_decompose(BipartiteGraph.from_system(system, with_s_edges=True)))
    remaining = set(report.flagged)
    taken = measured_states(system)
    chosen: List[int] = []
    while remaining:
        best, best_gain = None, 0
        for j in range(1, system.n + 1):
            if j in taken:
                continue
            gain = sum(1 for i in remaining if j in report.r_sets[i])
            if gain > best_gain:
                best, best_gain = j, gain
        if best is None:
            raise GsioError(f"No unmeasured state resolves components {sorted(remaining)}")
        remaining -= {i for i in remaining if best in report.r_sets[i]}
        taken.add(best)
        chosen.append(best)
        logger.debug(f"Greedy picks x{best}, resolving {best_gain} component(s)")
    return chosen


def _flagged_count(system: StructuredSystem) -> int:
    return len(dm_decompose(BipartiteGraph.from_system(system, with_s_edges=True)).flagged)


def _greedy_redecompose(system: StructuredSystem) -> List[int]:
    chosen: List[int] = []
    current = system
    f = _flagged_count(current)
    while f > 0:
        taken = measured_states(current)
        best, best_f = None, None
        for j in range(1, system.n + 1):
            if j in taken:
                continue
            f_j = _flagged_count(current.with_sensors([j]))
            if best_f is None or f_j < best_f:
                best, best_f = j, f_j
        if best is None:
            raise GsioError("Every state is measured but s-edge components remain")
        logger.debug(f"Greedy picks x{best}, f drops {f} -> {best_f}")
        chosen.append(best)
        current = current.with_sensors([best])
        f = best_f
    return chosen


def stage2_greedy(system: StructuredSystem, redecompose: bool = False) -> PlacementResult:
    """Greedily add sensors until D(B'(A,B,C)) has no s-edge component

    Each step measures the unmeasured state resolving the most flagged components, lowest index
    first on ties.

    Args:
        system: (A, B, C1) with a left-perfect B(A,B,C1)
        redecompose: Rebuild the decomposition after every sensor instead of reading the gains
            off the R sets of one decomposition

    Raises:
        PreconditionError: If B(A,B,C1) is not left-perfectly matchable
    """
    graph = BipartiteGraph.from_system(system)
    if not max_matching(graph).is_left_perfect(graph):
        raise PreconditionError("Stage 2 needs a left-perfect B(A,B,C); run stage 1 first")

    if redecompose:
        chosen = _greedy_redecompose(system)
    else:
        chosen = _greedy_incremental(system)
        if not is_gsio(system.with_sensors(chosen)):
            logger.warning("Incremental greedy left s-edge components; continuing with re-decomposition")
            chosen += _greedy_redecompose(system.with_sensors(chosen))

    logger.info(f"Stage 2 places {len(chosen)} sensor(s): {chosen}")
    return PlacementResult.create({SensorStage.STAGE2: chosen}, method="stage2")


def two_stage(system: StructuredSystem, redecompose: bool = False) -> PlacementResult:
    """Optimal stage 1 followed by the greedy stage 2"""
    base = system.without_outputs()
    first = stage1_placement(base)
    second = stage2_greedy(base.with_sensors(first.measured_states), redecompose=redecompose)
    result = PlacementResult.create(
        {
            SensorStage.STAGE1: first.measured_states,
            SensorStage.STAGE2: second.measured_states,
        },
        method="two_stage",
    )
    logger.info(f"Two-stage placement: {result}")
    return result


def candidate_positions(system: StructuredSystem, allow_input_measure: bool) -> List[Tuple[str, int]]:
    positions = [("x", i) for i in range(1, system.n + 1)]
    if allow_input_measure:
        positions += [("u", j) for j in range(1, system.q + 1)]
    return positions


def exact_min(
    system: StructuredSystem, allow_input_measure: bool = False, cap: Optional[int] = None
) -> PlacementResult:
    """Minimum dedicated placement by enumeration (cardinality first, then lexicographic)

    Args:
        system: Only A and B are used
        allow_input_measure: Also place sensors on inputs (D rows)
        cap: Largest number of candidate positions accepted; defaults to GSIO_BRUTE_FORCE_CAP

    Raises:
        CapExceededError: If there are more candidate positions than the cap
        InfeasibleError: If no placement works
    """
    cap = cap if cap is not None else get_settings().brute_force_cap
    base = system.without_outputs()
    positions = candidate_positions(base, allow_input_measure)
    if len(positions) > cap:
        raise CapExceededError(
            f"Exact search over {len(positions)} candidate positions exceeds the cap of {cap}",
            cap=cap,
            requested=len(positions),
        )

    start = 0
    if not allow_input_measure:
        # no placement beats the matching deficiency
        start = stage1_placement(base).total_count

    checked = 0
    for size in range(start, len(positions) + 1):
        for combo in combinations(positions, size):
            checked += 1
            states = [i for kind, i in combo if kind == "x"]
            inputs = [j for kind, j in combo if kind == "u"]
            if is_gsio(base.with_sensors(states, inputs)):
                logger.info(f"Exact optimum {size} found after {checked} checks")
                return PlacementResult.create(
                    {SensorStage.STAGE1: states},
                    inputs={SensorStage.STAGE1: inputs},
                    method="exact_direct" if allow_input_measure else "exact",
                )
    raise InfeasibleError("No sensor placement makes the system GSIO")
