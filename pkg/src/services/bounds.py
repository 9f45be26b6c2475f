# src/services/bounds.py
"""
Minimum sensors for structural observability, and the sensor-count intervals built on it.
"""
import logging
from typing import Iterable, List, Optional, Set

import networkx as nx

from src.models.graph import SystemDigraph, VertexKind
from src.models.pattern import Axis, SparsityPattern
from src.models.placement import (
    BoundsResult,
    BoundsVariant,
    MinObsResult,
    PlacementResult,
    SensorStage,
)
from src.models.system import StructuredSystem
from src.services.kernels import scc_decompose
from src.services.verify import is_gsio
from src.utils.errors import GsioError, InfeasibleError, PreconditionError

logger = logging.getLogger(__name__)


def require_dedicated_inputs(system: StructuredSystem) -> None:
    if system.q and not system.B.is_dedicated(Axis.COLUMNS):
        raise PreconditionError("B must be dedicated: every input drives exactly one state, no state twice")


def auxiliary_system(system: StructuredSystem) -> SparsityPattern:
    """(n+q)-square pattern Â: input j becomes state n+j, edges into input-driven states are cut

    Raises:
        PreconditionError: If B is not dedicated
    """
    require_dedicated_inputs(system)
    n = system.n
    driven = system.input_driven_states
    kept = {(i, j) for i, j in system.A.nonzeros if i not in driven}
    adjoined = {(system.input_target(j), n + j) for j in range(1, system.q + 1)}
    return SparsityPattern(n + system.q, n + system.q, frozenset(kept | adjoined))


def min_struct_obs(a_obs: SparsityPattern, candidates: Optional[Iterable[int]] = None) -> MinObsResult:
    """Fewest dedicated sensors making (A, C) structurally observable

    H = (n - m*) + (β - α): the matching deficiency plus the sink-SCCs that no left-unmatched
    vertex can cover. α comes from one maximum-weight matching on the state bipartite graph
    extended by a virtual right vertex per sink-SCC.

    Args:
        a_obs: Square state pattern
        candidates: States allowed to carry a sensor (all states by default)

    Raises:
        InfeasibleError: If the candidate restriction leaves a sink-SCC or an unmatched state
            without a usable sensor position
    """
    n = a_obs.rows
    if a_obs.cols != n:
        raise ValueError(f"State matrix must be square, got {a_obs.rows}x{a_obs.cols}")
    allowed: Set[int] = set(candidates) if candidates is not None else set(range(1, n + 1))
    restricted = len(allowed) < n

    partition = scc_decompose(SystemDigraph.from_patterns(a_obs), kinds=[VertexKind.STATE])
    sinks = partition.sink_components

    # matching size first, then (when restricted) non-candidates matched, then covered sinks
    base = (n + 1) ** 2 if restricted else n + 1
    bonus = n + 1 if restricted else 0
    graph = nx.Graph()
    graph.add_nodes_from(("l", j) for j in range(1, n + 1))
    for i, j in a_obs.nonzeros:
        weight = base + (bonus if j not in allowed else 0)
        graph.add_edge(("l", j), ("r", i), weight=weight)
    for k, sink in enumerate(sinks):
        for x in sink:
            if x.index in allowed:
                graph.add_edge(("l", x.index), ("t", k), weight=1)

    pairs = nx.max_weight_matching(graph, maxcardinality=False, weight="weight")
    matched_left: Set[int] = set()
    covered_sinks: Set[int] = set()
    for a, b in pairs:
        left, other = (a, b) if a[0] == "l" else (b, a)
        if other[0] == "r":
            matched_left.add(left[1])
        else:
            covered_sinks.add(other[1])

    unmatched = sorted(set(range(1, n + 1)) - matched_left)
    blocked = [j for j in unmatched if j not in allowed]
    if blocked:
        raise InfeasibleError(f"States {blocked} stay unmatched and cannot carry a sensor")

    witness: List[int] = list(unmatched)
    unmatched_set = set(unmatched)
    for k, sink in enumerate(sinks):
        members = sorted(x.index for x in sink)
        if any(j in unmatched_set for j in members):
            continue
        usable = [j for j in members if j in allowed]
        if not usable:
            raise InfeasibleError(f"Sink component {{{', '.join(f'x{j}' for j in members)}}} has no candidate state")
        witness.append(usable[0])

    result = MinObsResult(
        count=len(witness),
        witness=tuple(witness),
        n=n,
        matching_size=n - len(unmatched),
        sink_count=len(sinks),
        assignable=len(covered_sinks),
    )
    logger.debug(f"Minimum structural observability: {result.to_dict()}")
    return result


def _reposition(system: StructuredSystem, sensors: Set[int]) -> Set[int]:
    """Move sensors off input-driven states onto a predecessor of one of their out-neighbours,
    then measure every input-driven state"""
    driven = set(system.input_driven_states)
    placed = set(sensors - driven)
    for i in sorted(sensors & driven):
        targets = [k for k in system.A.col_support(i) if k != i]
        options = sorted(
            l
            for k in targets
            for l in system.A.row_support(k)
            if l != i and l not in driven and l not in placed
        )
        if options:
            placed.add(options[0])
    return placed | driven


def bounds_dedicated(system: StructuredSystem) -> BoundsResult:
    """Interval [H(Â), min(H(Â)+q, n)] for the fewest dedicated state sensors, with a witness

    Raises:
        PreconditionError: If B is not dedicated
    """
    require_dedicated_inputs(system)
    base = system.without_outputs()
    n, q = base.n, base.q
    minobs = min_struct_obs(auxiliary_system(base), candidates=range(1, n + 1))
    lower, upper = minobs.count, min(minobs.count + q, n)

    sensors = _reposition(base, set(minobs.witness))
    if not is_gsio(base.with_sensors(sensors)):
        logger.warning("Repositioned witness is not GSIO; measuring the input-driven states instead")
        sensors = set(minobs.witness) | set(base.input_driven_states)
        if not is_gsio(base.with_sensors(sensors)):
            raise GsioError("Upper-bound witness failed the GSIO check")

    extra = sorted(sensors - set(minobs.witness))
    witness = PlacementResult.create(
        {SensorStage.STAGE1: sorted(sensors & set(minobs.witness)), SensorStage.EXTRA: extra},
        method="bounds_dedicated",
    )
    logger.info(f"Dedicated bounds [{lower}, {upper}], witness of size {witness.total_count}")
    return BoundsResult(lower, upper, witness, BoundsVariant.DEDICATED, minobs.count, q, n)


def bounds_direct_measure(system: StructuredSystem) -> BoundsResult:
    """Interval [H(A), min(H(A)+q, n)] when sensors may measure inputs directly

    Raises:
        PreconditionError: If B is not dedicated
    """
    require_dedicated_inputs(system)
    base = system.without_outputs()
    n, q = base.n, base.q
    minobs = min_struct_obs(base.A)
    lower, upper = minobs.count, min(minobs.count + q, n)

    if minobs.count + q <= n:
        states, inputs = list(minobs.witness), list(range(1, q + 1))
    else:
        states, inputs = list(range(1, n + 1)), []
    if not is_gsio(base.with_sensors(states, inputs)):
        logger.warning("Direct-measure witness is not GSIO; measuring every state instead")
        states, inputs = list(range(1, n + 1)), []
        if not is_gsio(base.with_sensors(states)):
            raise GsioError("Upper-bound witness failed the GSIO check")

    stage1 = [i for i in states if i in set(minobs.witness)]
    witness = PlacementResult.create(
        {SensorStage.STAGE1: stage1, SensorStage.EXTRA: [i for i in states if i not in set(stage1)]},
        inputs={SensorStage.EXTRA: inputs},
        method="bounds_direct_measure",
    )
    logger.info(f"Direct-measure bounds [{lower}, {upper}], witness of size {witness.total_count}")
    return BoundsResult(lower, upper, witness, BoundsVariant.DIRECT_MEASURE, minobs.count, q, n)
