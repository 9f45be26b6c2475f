# src/services/verify.py
import logging
from typing import Optional

import numpy as np

from src.config.settings import get_settings
from src.models.graph import BipartiteGraph, SystemDigraph, labels
from src.models.pattern import SparsityPattern
from src.models.system import StructuredSystem
from src.models.verdict import CheckMethod, GsioVerdict, StructObsVerdict
from src.services.dm import dm_decompose
from src.services.kernels import RESIDUAL, delta0, theta, v_ess, y_reached
from src.services.matching import matching_number, max_matching
from src.utils.errors import RouteDisagreementError

logger = logging.getLogger(__name__)


def check_gsio_dm(system: StructuredSystem) -> GsioVerdict:
    """GSIO through the DM-decomposition route

    Condition 1: B(A,B,C) has a left-perfect matching (no B_0).
    Condition 2: no middle block of D(B'(A,B,C)) contains an s-edge.
    """
    graph = BipartiteGraph.from_system(system)
    matching = max_matching(graph)
    decomposition = dm_decompose(BipartiteGraph.from_system(system, with_s_edges=True))
    return GsioVerdict(
        method=CheckMethod.DM,
        dm_cond_1=matching.is_left_perfect(graph),
        dm_cond_2=not decomposition.flagged,
        unmatched_left=labels(matching.unmatched_left(graph)),
        s_edge_components=decomposition.flagged,
    )


def check_gsio_digraph(system: StructuredSystem, method: str = RESIDUAL) -> GsioVerdict:
    """GSIO through the digraph route

    Condition 1: θ(X∪U, X∪Y) = n + q.
    Condition 2: every state reaches an output.
    Condition 3: Δ0 ⊆ V_ess(U, Y).

    Input reachability is reported but not part of condition 2.
    """
    digraph = SystemDigraph.from_system(system)
    states, inputs, outputs = digraph.states, digraph.inputs, digraph.outputs
    matched = theta(digraph, states + inputs, states + outputs)
    reached = y_reached(digraph)
    zero_set = delta0(digraph, method=method)
    essential = v_ess(digraph, inputs, outputs, method=method)
    return GsioVerdict(
        method=CheckMethod.DIGRAPH,
        dg_cond_1=matched == system.n + system.q,
        dg_cond_2=all(x in reached for x in states),
        dg_cond_3=zero_set <= essential,
        theta=matched,
        unreached_states=labels(x for x in states if x not in reached),
        unreached_inputs=labels(v for v in inputs if v not in reached),
        delta0_outside_ess=labels(zero_set - essential),
    )


def check_gsio(system: StructuredSystem, method: CheckMethod = CheckMethod.BOTH) -> GsioVerdict:
    """Run one or both GSIO routes

    Raises:
        RouteDisagreementError: If both routes run and their overall verdicts differ
    """
    if method is CheckMethod.DM:
        return check_gsio_dm(system)
    if method is CheckMethod.DIGRAPH:
        return check_gsio_digraph(system)
    verdict = check_gsio_dm(system).merge(check_gsio_digraph(system))
    if not verdict.routes_agree:
        logger.error(f"GSIO routes disagree: {verdict.to_dict()}")
        raise RouteDisagreementError(
            f"DM route says {verdict.dm_overall}, digraph route says {verdict.digraph_overall}"
        )
    return verdict


def is_gsio(system: StructuredSystem) -> bool:
    """DM-route check that stops at the first failed condition"""
    graph = BipartiteGraph.from_system(system)
    if not max_matching(graph).is_left_perfect(graph):
        return False
    return not dm_decompose(BipartiteGraph.from_system(system, with_s_edges=True)).flagged


def check_struct_obs(a_obs: SparsityPattern, c: SparsityPattern) -> StructObsVerdict:
    """Structural observability of (A, C): θ(X, X∪Y) = n and every state reaches an output"""
    if a_obs.rows != a_obs.cols:
        raise ValueError(f"State matrix must be square, got {a_obs.rows}x{a_obs.cols}")
    digraph = SystemDigraph.from_patterns(a_obs, None, c)
    states = digraph.states
    matched = theta(digraph, states, states + digraph.outputs)
    reached = y_reached(digraph)
    unreached = labels(x for x in states if x not in reached)
    return StructObsVerdict(
        overall=matched == a_obs.rows and not unreached,
        matching_size=matched,
        n=a_obs.rows,
        unreached_states=unreached,
    )


def generic_rank(pattern: SparsityPattern) -> int:
    """Term rank: the size of a maximum matching between columns and rows"""
    return matching_number(BipartiteGraph.from_pattern(pattern))


def numeric_rank_oracle(
    pattern: SparsityPattern,
    seed: int = 0,
    trials: Optional[int] = None,
    tolerance: Optional[float] = None,
) -> int:
    """Largest numerical rank over random realizations with entries drawn from [1, 2]"""
    settings = get_settings()
    trials = trials if trials is not None else settings.rank_trials
    tolerance = tolerance if tolerance is not None else settings.rank_tolerance
    if trials < 1:
        raise ValueError("At least one trial is required")
    if pattern.nnz == 0:
        return 0
    rng = np.random.default_rng(seed)
    entries = pattern.entries()
    rows = np.array([r - 1 for r, _ in entries])
    cols = np.array([c - 1 for _, c in entries])
    best = 0
    for _ in range(trials):
        realization = np.zeros(pattern.shape)
        realization[rows, cols] = rng.uniform(1.0, 2.0, size=len(entries))
        best = max(best, int(np.linalg.matrix_rank(realization, tol=tolerance)))
    return best
