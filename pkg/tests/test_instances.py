import numpy as np
import pytest

from src.models.graph import BipartiteGraph
from src.models.pattern import Axis
from src.models.placement import SensorStage
from src.models.setcover import EntryRole, SetCoverInstance
from src.services.dm import dm_decompose
from src.services.instances import (
    build_reduction_matrix,
    column_permutation,
    extended_family,
    gen_random,
    reduce_setcover,
    setcover_exact,
    setcover_greedy,
)
from src.services.placement import exact_min, two_stage
from src.services.verify import check_gsio
from src.utils.errors import CapExceededError, InfeasibleError, PreconditionError


def _random_instance(rng, p: int, q: int) -> SetCoverInstance:
    subsets = []
    for _ in range(q):
        size = int(rng.integers(1, p + 1))
        subsets.append({int(e) for e in rng.choice(np.arange(1, p + 1), size=size, replace=False)})
    for element in range(1, p + 1):
        if not any(element in s for s in subsets):
            subsets[int(rng.integers(0, q))].add(element)
    return SetCoverInstance(p, tuple(frozenset(s) for s in subsets))


def test_reduction_matrix_roles(triangle):
    """Test the s-entries and the subset membership entries of M(s)"""
    m_matrix = build_reduction_matrix(triangle)
    assert m_matrix.size == 15
    assert m_matrix.entries_with(EntryRole.S) == [
        (1, 4), (2, 5), (3, 6), (4, 13), (5, 14), (6, 15),
        (7, 8), (8, 7), (9, 10), (10, 9), (11, 12), (12, 11),
    ]
    free = set(m_matrix.entries_with(EntryRole.FREE))
    assert {(i, i) for i in range(1, 16)} <= free
    assert free - {(i, i) for i in range(1, 16)} == {(4, 7), (4, 9), (5, 9), (5, 11), (6, 7), (6, 11)}
    assert m_matrix.role(4, 7) == "*"
    assert m_matrix.role(7, 8) == "s"
    assert m_matrix.role(1, 2) == "0"


def test_column_permutation(triangle):
    """Test that every s-entry lands on the diagonal and the rest fill the tail"""
    permutation = column_permutation(build_reduction_matrix(triangle), 12)
    assert permutation == (13, 14, 15, 1, 2, 3, 8, 7, 10, 9, 12, 11, 4, 5, 6)
    assert sorted(permutation) == list(range(1, 16))


def test_reduced_system(triangle):
    """Test the A, B and C1 blocks read off R(s)"""
    output = reduce_setcover(triangle)
    system = output.system
    assert (system.n, system.q, system.m) == (12, 3, 3)
    assert system.A.entries() == [
        (4, 1), (4, 8), (4, 10), (5, 2), (5, 10), (5, 12), (6, 3), (6, 8), (6, 12),
        (7, 8), (8, 7), (9, 10), (10, 9), (11, 12), (12, 11),
    ]
    assert system.B.entries() == [(1, 1), (2, 2), (3, 3)]
    assert system.C.entries() == [(1, 4), (2, 5), (3, 6)]
    assert system.D.nnz == 0
    assert system.B.is_dedicated(Axis.COLUMNS)
    assert output.stage1_states == [4, 5, 6]
    assert all(output.r_matrix.role(i, i) == "s" for i in range(1, 13))


def test_reduction_to_dict(triangle):
    """Test the report layout of a reduction"""
    data = reduce_setcover(triangle).to_dict()
    assert data["instance"] == {"p": 3, "subsets": [[1, 2], [2, 3], [1, 3]]}
    assert data["column_permutation"][:3] == [13, 14, 15]
    assert data["subset_sites"] == {"1": 1, "2": 2, "3": 3}
    assert data["element_states"] == {"1": [7, 8], "2": [9, 10], "3": [11, 12]}
    assert len(data["M"]["s"]) == 12


def test_reduced_placement_matches_cover(triangle):
    """Test that the placement optimum is q plus the minimum extended cover"""
    output = reduce_setcover(triangle)
    cover = setcover_exact(triangle)
    assert cover == [1, 2]
    assert exact_min(output.system).total_count == 5 == len(cover) + triangle.q

    greedy = two_stage(output.system)
    assert greedy.total_count == 5
    assert greedy.states_in(SensorStage.STAGE1) == output.stage1_states
    assert greedy.states_in(SensorStage.STAGE2) == [output.subset_sites[i] for i in setcover_greedy(triangle)]


def test_random_reductions_match_cover():
    """Test the reduction identity on random instances"""
    rng = np.random.default_rng(13)
    for _ in range(15):
        instance = _random_instance(rng, int(rng.integers(1, 5)), int(rng.integers(1, 4)))
        _assert_reduction_identity(instance)


@pytest.mark.slow
def test_reduction_identity_up_to_search_cap():
    """Test the reduction identity up to sixteen states"""
    rng = np.random.default_rng(17)
    for _ in range(30):
        q = int(rng.integers(1, 6))
        instance = _random_instance(rng, int(rng.integers(1, 9 - q)), q)
        _assert_reduction_identity(instance)


def _assert_reduction_identity(instance: SetCoverInstance) -> None:
    system = reduce_setcover(instance).system
    optimum = exact_min(system).total_count
    assert optimum == len(setcover_exact(instance)) + instance.q, instance.to_dict()
    stage2 = two_stage(system).states_in(SensorStage.STAGE2)
    harmonic = sum(1 / k for k in range(1, instance.p + 1))
    assert len(stage2) <= (optimum - instance.q) * harmonic + 1e-9


def test_reduction_block_shape():
    """Test block count, block sizes and the flagged blocks of random reductions"""
    rng = np.random.default_rng(19)
    for _ in range(40):
        instance = _random_instance(rng, int(rng.integers(1, 7)), int(rng.integers(1, 5)))
        output = reduce_setcover(instance)
        graph = BipartiteGraph.from_system(output.system, with_s_edges=True)
        decomposition = dm_decompose(graph)
        assert not decomposition.has_horizontal and not decomposition.has_vertical
        assert decomposition.k == instance.p + 3 * instance.q
        assert all(len(c.left) == len(c.right) in (1, 2) for c in decomposition.components)

        flagged = [decomposition.component(i).left_states for i in decomposition.flagged]
        pairs = {frozenset(states) for states in output.element_states.values()}
        assert len(flagged) == instance.p
        assert set(flagged) == pairs


def test_setcover_greedy_and_exact(triangle):
    """Test the two set-cover solvers on the triangle"""
    assert setcover_greedy(triangle) == [1, 2]
    assert len(extended_family(triangle)) == 6
    assert extended_family(triangle)[-1] == frozenset({3})


def test_setcover_singletons_fill_gaps():
    """Test that singletons are chosen when no subset is worth more"""
    instance = SetCoverInstance(3, (frozenset({1}), frozenset({2}), frozenset({3})))
    assert setcover_greedy(instance) == [1, 2, 3]
    assert setcover_exact(instance) == [1, 2, 3]


def test_setcover_cap(triangle, monkeypatch):
    """Test that the set-cover enumeration honours its cap"""
    with pytest.raises(CapExceededError) as excinfo:
        setcover_exact(triangle, cap=5)
    assert excinfo.value.requested == 6
    monkeypatch.setenv("GSIO_SETCOVER_CAP", "4")
    with pytest.raises(CapExceededError):
        setcover_exact(triangle)


def test_greedy_within_harmonic_factor():
    """Test the greedy cover size against the logarithmic guarantee"""
    rng = np.random.default_rng(29)
    for _ in range(100):
        p, q = int(rng.integers(1, 7)), int(rng.integers(1, 6))
        instance = _random_instance(rng, p, q)
        greedy = setcover_greedy(instance)
        family = extended_family(instance)
        assert set().union(*(family[k - 1] for k in greedy)) == set(range(1, p + 1))
        harmonic = sum(1 / k for k in range(1, p + 1))
        assert len(greedy) <= len(setcover_exact(instance)) * harmonic + 1e-9


def test_gen_random_is_deterministic():
    """Test that one seed gives one system"""
    first = gen_random(8, 3, 0.3, seed=5)
    assert gen_random(8, 3, 0.3, seed=5) == first
    assert first.m == 0
    assert first.B.cols == 3


def test_gen_random_options():
    """Test dedicated inputs and forced self-loops"""
    system = gen_random(6, 2, 0.2, dedicated_inputs=True, self_loops=True, seed=1)
    assert system.B.is_dedicated(Axis.COLUMNS)
    assert len(system.input_driven_states) == 2
    assert all(system.A.has(i, i) for i in range(1, 7))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n": 0, "q": 1, "density": 0.5},
        {"n": 3, "q": -1, "density": 0.5},
        {"n": 3, "q": 1, "density": 0.0},
        {"n": 3, "q": 1, "density": 1.5},
        {"n": 2, "q": 3, "density": 0.5, "dedicated_inputs": True},
    ],
)
def test_gen_random_rejects_arguments(kwargs):
    """Test argument validation of the generator"""
    with pytest.raises(PreconditionError):
        gen_random(**kwargs)


def test_gen_random_gives_up():
    """Test that a rank-deficient shape exhausts the attempts"""
    with pytest.raises(InfeasibleError):
        gen_random(1, 2, 0.5, max_attempts=5)


@pytest.mark.slow
def test_large_random_system_smoke():
    """Test checking and placing on a thousand-state system"""
    n = 1000
    system = gen_random(n, 5, 5 / n, dedicated_inputs=True, seed=0)
    assert not check_gsio(system).overall

    result = two_stage(system)
    assert len(result.states_in(SensorStage.STAGE1)) >= 1
    verdict = check_gsio(result.apply_to(system))
    assert verdict.overall
    assert verdict.routes_agree


def test_singletons_can_be_replaced():
    """Test that swapping chosen singletons for covering subsets keeps a cover no larger"""
    rng = np.random.default_rng(37)
    for _ in range(50):
        instance = _random_instance(rng, int(rng.integers(1, 6)), int(rng.integers(1, 5)))
        chosen = setcover_exact(instance)
        replaced = set()
        for k in chosen:
            if k <= instance.q:
                replaced.add(k)
            else:
                element = k - instance.q
                replaced.add(next(i for i, s in enumerate(instance.subsets, start=1) if element in s))
        assert len(replaced) <= len(chosen)
        assert instance.covers(sorted(replaced))
