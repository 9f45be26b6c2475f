# src/services/instances.py
import logging
from itertools import combinations
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from src.config.settings import get_settings
from src.models.pattern import Entry, SparsityPattern
from src.models.setcover import EntryRole, ReductionOutput, RoleMatrix, SetCoverInstance
from src.models.system import StructuredSystem
from src.services.verify import generic_rank
from src.utils.errors import CapExceededError, InfeasibleError, PreconditionError

logger = logging.getLogger(__name__)


def build_reduction_matrix(instance: SetCoverInstance) -> RoleMatrix:
    """M(s) of size 2p+3q

    Rows/columns 1..q stand for the inputs, q+1..2q for the subset states, 2q+1..2q+2p for the
    element pairs and 2q+2p+1..2p+3q for the sensors of C1.
    """
    p, q = instance.p, instance.q
    size = 2 * p + 3 * q
    roles: Dict[Entry, EntryRole] = {(i, i): EntryRole.FREE for i in range(1, size + 1)}
    for element in range(1, p + 1):
        a = 2 * q + 2 * element - 1
        roles[(a, a + 1)] = EntryRole.S
        roles[(a + 1, a)] = EntryRole.S
    for i in range(1, q + 1):
        roles[(i, i + q)] = EntryRole.S
        roles[(i + q, i + 2 * q + 2 * p)] = EntryRole.S
    for i, subset in enumerate(instance.subsets, start=1):
        for element in subset:
            roles[(i + q, 2 * element + 2 * q - 1)] = EntryRole.FREE
    return RoleMatrix(size, roles)


def column_permutation(m_matrix: RoleMatrix, leading: int) -> Tuple[int, ...]:
    """Column c of M(s) moves to the row of its s-entry; columns without one fill the tail in order"""
    target: Dict[int, int] = {c: r for (r, c) in m_matrix.entries_with(EntryRole.S)}
    free_columns = [c for c in range(1, m_matrix.size + 1) if c not in target]
    for offset, c in enumerate(free_columns, start=1):
        target[c] = leading + offset
    permutation = tuple(target[c] for c in range(1, m_matrix.size + 1))
    if sorted(permutation) != list(range(1, m_matrix.size + 1)):
        raise ValueError("s-entries do not define a column permutation")
    return permutation


def reduce_setcover(instance: SetCoverInstance) -> ReductionOutput:
    """Encode an extended set cover instance as a dedicated sensor placement problem

    Returns:
        ReductionOutput holding M(s), the permuted R(s) with s on its leading 2p+2q diagonal
        positions, and the system (A, B, C1) read off R(s)
    """
    p, q = instance.p, instance.q
    n = 2 * p + 2 * q
    m_matrix = build_reduction_matrix(instance)
    permutation = column_permutation(m_matrix, n)
    r_roles = {(r, permutation[c - 1]): role for (r, c), role in m_matrix.roles.items()}
    r_matrix = RoleMatrix(m_matrix.size, r_roles)

    diagonal = [i for i in range(1, n + 1) if r_roles.get((i, i)) is EntryRole.S]
    if len(diagonal) != n:
        raise ValueError("Permuted matrix must carry s on its leading diagonal")

    free = set(r_matrix.entries_with(EntryRole.FREE))
    a = SparsityPattern(n, n, frozenset((r, c) for r, c in free if r <= n and c <= n))
    b = SparsityPattern(n, q, frozenset((r, c - n) for r, c in free if r <= n and c > n))
    c1 = SparsityPattern(q, n, frozenset((r - n, c) for r, c in free if r > n and c <= n))
    if any(r > n and c > n for r, c in free):
        raise ValueError("Reduction produced a nonzero D block")
    system = StructuredSystem.create(a, b, c1, dedicated_inputs=True, dedicated_outputs=True)

    output = ReductionOutput(
        instance=instance,
        m_matrix=m_matrix,
        column_permutation=permutation,
        r_matrix=r_matrix,
        system=system,
        subset_sites={i: i for i in range(1, q + 1)},
        element_states={e: (2 * q + 2 * e - 1, 2 * q + 2 * e) for e in range(1, p + 1)},
    )
    logger.info(f"Reduced set cover (p={p}, q={q}) to a system with n={n}, q={q}, |C1|={q}")
    return output


def gen_random(
    n: int,
    q: int,
    density: float,
    dedicated_inputs: bool = False,
    self_loops: bool = False,
    seed: int = 0,
    max_attempts: int = 1000,
) -> StructuredSystem:
    """Random structured system (A, B) with grank(B) = q and no outputs

    Raises:
        PreconditionError: On unusable arguments, including q > n with dedicated inputs
        InfeasibleError: If no full-rank B turns up within `max_attempts`
    """
    if n < 1 or q < 0:
        raise PreconditionError(f"Need n >= 1 and q >= 0, got n={n}, q={q}")
    if not 0 < density <= 1:
        raise PreconditionError(f"Density must lie in (0, 1], got {density}")
    if dedicated_inputs and q > n:
        raise PreconditionError(f"Cannot dedicate {q} inputs to {n} states")

    rng = np.random.default_rng(seed)
    for attempt in range(1, max_attempts + 1):
        mask = rng.random((n, n)) < density
        if self_loops:
            np.fill_diagonal(mask, True)
        a = SparsityPattern(n, n, frozenset((int(r) + 1, int(c) + 1) for r, c in zip(*np.nonzero(mask))))
        if dedicated_inputs:
            targets = rng.choice(n, size=q, replace=False)
            b_entries = {(int(t) + 1, j) for j, t in enumerate(targets, start=1)}
        else:
            b_mask = rng.random((n, q)) < density
            b_entries = {(int(r) + 1, int(c) + 1) for r, c in zip(*np.nonzero(b_mask))}
        b = SparsityPattern(n, q, frozenset(b_entries))
        if generic_rank(b) == q:
            logger.debug(f"Random system accepted after {attempt} attempt(s)")
            return StructuredSystem.create(a, b, dedicated_inputs=dedicated_inputs)
    raise InfeasibleError(f"No B with generic rank {q} after {max_attempts} attempts")


def extended_family(instance: SetCoverInstance) -> List[frozenset]:
    """S_1..S_q followed by the singletons {1}..{p}"""
    return list(instance.subsets) + [frozenset([e]) for e in range(1, instance.p + 1)]


def setcover_greedy(instance: SetCoverInstance) -> List[int]:
    """Largest marginal coverage first, lowest index on ties; indices into the extended family"""
    family = extended_family(instance)
    covered: Set[int] = set()
    chosen: List[int] = []
    while len(covered) < instance.p:
        gains = [len(s - covered) for s in family]
        best = max(range(len(family)), key=lambda k: (gains[k], -k))
        chosen.append(best + 1)
        covered |= family[best]
    return chosen


def setcover_exact(instance: SetCoverInstance, cap: Optional[int] = None) -> List[int]:
    """Minimum cover by enumeration over the extended family

    Raises:
        CapExceededError: If q + p exceeds the cap (GSIO_SETCOVER_CAP by default)
    """
    cap = cap if cap is not None else get_settings().setcover_cap
    family = extended_family(instance)
    if len(family) > cap:
        raise CapExceededError(
            f"Exact set cover over {len(family)} sets exceeds the cap of {cap}",
            cap=cap,
            requested=len(family),
        )
    universe = set(range(1, instance.p + 1))
    for size in range(1, len(family) + 1):
        for combo in combinations(range(len(family)), size):
            if set().union(*(family[k] for k in combo)) == universe:
                return [k + 1 for k in combo]
    raise InfeasibleError("Extended family does not cover the universe")
