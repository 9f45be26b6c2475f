# src/services/polycase.py
"""
Exact placement for single-input systems where every state carries a self-loop.

With more than one input-reachable sink-SCC the optimum is one sensor per sink-SCC of the
auxiliary system, plus a sensor on the input-driven state when the essential vertices of the
input-to-sensor linking fail to cover Δ0. With exactly one such sink-SCC a short search over
one or two extra sensors replaces that test.
"""
import logging
from itertools import combinations
from typing import List, Optional, Tuple

from src.models.graph import SystemDigraph, VertexKind, u, x
from src.models.pattern import Axis, SparsityPattern, build_output_pattern
from src.models.placement import PlacementResult, SensorStage
from src.models.system import StructuredSystem
from src.services.bounds import auxiliary_system
from src.services.kernels import reachable_from, rho, scc_decompose, v_ess
from src.services.verify import check_gsio_digraph
from src.utils.errors import GsioError, InfeasibleError, PreconditionError

logger = logging.getLogger(__name__)


def check_polycase_preconditions(system: StructuredSystem) -> None:
    """Raises PreconditionError naming the first violated requirement"""
    missing = [i for i in range(1, system.n + 1) if not system.A.has(i, i)]
    if missing:
        raise PreconditionError(f"Self-loops missing on states {missing}")
    if system.q != 1:
        raise PreconditionError(f"Exactly one input is required, got q={system.q}")
    if not system.B.is_dedicated(Axis.COLUMNS):
        raise PreconditionError("The input must drive exactly one state")


def input_adjoined(system: StructuredSystem) -> SparsityPattern:
    """A with the single input adjoined as state n+1, no edges removed"""
    n = system.n
    return SparsityPattern(
        n + 1, n + 1, system.A.nonzeros | {(system.input_target(1), n + 1)}
    )


def l_count(a_hat: SparsityPattern) -> int:
    """Number of sink-SCCs reachable from the input, which sits at the last index of `a_hat`"""
    digraph = SystemDigraph.from_patterns(a_hat)
    partition = scc_decompose(digraph, kinds=[VertexKind.STATE])
    reached = reachable_from(digraph, [x(a_hat.rows)])
    return sum(1 for sink in partition.sink_components if sink & reached)


def sink_representatives(pattern: SparsityPattern, n: int, skip_reachable_from: Optional[int] = None) -> List[int]:
    """Lowest original state of every sink-SCC, optionally only those the given vertex cannot reach"""
    digraph = SystemDigraph.from_patterns(pattern)
    partition = scc_decompose(digraph, kinds=[VertexKind.STATE])
    reached = reachable_from(digraph, [x(skip_reachable_from)]) if skip_reachable_from else set()
    chosen = []
    for sink in partition.sink_components:
        if sink & reached:
            continue
        states = sorted(v.index for v in sink if v.index <= n)
        if states:
            chosen.append(states[0])
    return sorted(chosen)


def _variant_pattern(system: StructuredSystem, direct_measure: bool) -> SparsityPattern:
    return input_adjoined(system) if direct_measure else auxiliary_system(system)


def polycase_selfloop(system: StructuredSystem, direct_measure: bool = False) -> PlacementResult:
    """Optimal placement when L > 1

    Args:
        system: (A', e_i) with self-loops on every state
        direct_measure: Work on A' itself and let the extra sensor measure the input

    Raises:
        PreconditionError: On missing self-loops, q != 1, or L <= 1
    """
    check_polycase_preconditions(system)
    base = system.without_outputs()
    n = base.n
    pattern = _variant_pattern(base, direct_measure)
    count = l_count(pattern)
    if count <= 1:
        raise PreconditionError(f"Input reaches {count} sink-SCC(s); this route needs more than one")

    sensors = sink_representatives(pattern, n)
    if direct_measure:
        digraph = SystemDigraph.from_system(base.with_sensors(sensors))
        source = u(1)
    else:
        digraph = SystemDigraph.from_patterns(pattern, None, build_output_pattern(sensors, n + 1))
        source = x(n + 1)
    outputs = digraph.outputs
    essential = v_ess(digraph, [source], outputs)
    base_rho = rho(digraph, [source], outputs)
    logger.debug(f"Sink sensors {sensors}, essential {sorted(v.label for v in essential)}, ρ={base_rho}")

    extra: Optional[int] = None
    for i in range(1, n + 1):
        if x(i) not in essential and rho(digraph, [source, x(i)], outputs) == base_rho:
            extra = i
            break

    target = base.input_target(1)
    if extra is None:
        result = PlacementResult.create({SensorStage.STAGE1: sensors}, method="polycase")
    elif direct_measure:
        logger.info(f"x{extra} escapes the essential set; measuring u1 directly")
        result = PlacementResult.create(
            {SensorStage.STAGE1: sensors}, inputs={SensorStage.EXTRA: [1]}, method="polycase_direct"
        )
    elif target in sensors:
        raise GsioError(f"Input-driven state x{target} is already measured but Δ0 is not covered")
    else:
        logger.info(f"x{extra} escapes the essential set; measuring input-driven state x{target}")
        result = PlacementResult.create(
            {SensorStage.STAGE1: sensors, SensorStage.EXTRA: [target]}, method="polycase"
        )

    if not check_gsio_digraph(result.apply_to(base)).overall:
        raise GsioError(f"Self-loop placement {result} failed the GSIO check")
    return result


def polycase_fallback(system: StructuredSystem, direct_measure: bool = False) -> PlacementResult:
    """Placement when L = 1: cover the sinks the input cannot reach, then try one or two more sensors

    Raises:
        PreconditionError: On missing self-loops, q != 1, or L != 1
        InfeasibleError: If no extension of at most two sensors satisfies the digraph conditions
    """
    check_polycase_preconditions(system)
    base = system.without_outputs()
    n = base.n
    pattern = _variant_pattern(base, direct_measure)
    count = l_count(pattern)
    if count != 1:
        raise PreconditionError(f"Input reaches {count} sink-SCC(s); this route needs exactly one")

    unreached = sink_representatives(pattern, n, skip_reachable_from=n + 1)
    positions: List[Tuple[str, int]] = [("x", i) for i in range(1, n + 1) if i not in unreached]
    if direct_measure:
        positions.append(("u", 1))

    for size in range(0, 3):
        for combo in combinations(positions, size):
            states = unreached + [i for kind, i in combo if kind == "x"]
            inputs = [j for kind, j in combo if kind == "u"]
            if check_gsio_digraph(base.with_sensors(states, inputs)).overall:
                logger.info(f"Fallback adds {size} sensor(s) to {len(unreached)} unreached sink sensor(s)")
                return PlacementResult.create(
                    {
                        SensorStage.STAGE1: unreached,
                        SensorStage.EXTRA: [i for kind, i in combo if kind == "x"],
                    },
                    inputs={SensorStage.EXTRA: inputs},
                    method="polycase_fallback",
                )
    raise InfeasibleError("No extension by two sensors satisfies the GSIO conditions")


def polycase(system: StructuredSystem, direct_measure: bool = False) -> PlacementResult:
    """Pick the self-loop route or its fallback from the number of input-reachable sink-SCCs"""
    check_polycase_preconditions(system)
    count = l_count(_variant_pattern(system.without_outputs(), direct_measure))
    logger.info(f"Input reaches {count} sink-SCC(s)")
    if count > 1:
        return polycase_selfloop(system, direct_measure)
    return polycase_fallback(system, direct_measure)
