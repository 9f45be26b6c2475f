from itertools import combinations

import numpy as np
import pytest

from src.models.graph import SystemDigraph, VertexKind, x
from src.models.pattern import SparsityPattern, build_output_pattern
from src.models.placement import SensorStage
from src.models.system import StructuredSystem
from src.services.bounds import auxiliary_system, min_struct_obs
from src.services.instances import gen_random
from src.services.kernels import v_ess
from src.services.placement import exact_min
from src.services.polycase import (
    input_adjoined,
    l_count,
    polycase,
    polycase_fallback,
    polycase_selfloop,
)
from src.services.verify import check_struct_obs, is_gsio
from src.utils.errors import PreconditionError


@pytest.fixture
def looped_pair():
    """x1 -> x2 with self-loops, input on x1"""
    return StructuredSystem.create(
        SparsityPattern.from_entries(2, 2, [(1, 1), (2, 2), (2, 1)]),
        SparsityPattern.from_entries(2, 1, [(1, 1)]),
        dedicated_inputs=True,
    )


def test_branch_sink_sensors(branch):
    """Test that the branch needs exactly one sensor per sink component"""
    assert l_count(auxiliary_system(branch)) == 2
    result = polycase_selfloop(branch)
    assert result.measured_states == (3, 4)
    assert result.states_in(SensorStage.EXTRA) == []
    assert result.method == "polycase"
    assert polycase(branch) == result
    assert exact_min(branch).total_count == 2


def test_branch_direct_variant(branch):
    """Test the input-adjoined variant on the branch"""
    assert l_count(input_adjoined(branch)) == 2
    result = polycase(branch, direct_measure=True)
    assert result.measured_states == (3, 4)
    assert result.measured_inputs == ()


def test_missing_self_loops(plant):
    """Test that states without self-loops are named"""
    with pytest.raises(PreconditionError, match=r"\[3, 4, 5\]"):
        polycase(plant)


def test_single_input_required():
    """Test that two inputs are refused"""
    system = StructuredSystem.create(SparsityPattern.identity(2), SparsityPattern.identity(2))
    with pytest.raises(PreconditionError, match="q=2"):
        polycase(system)


def test_selfloop_route_needs_several_sinks(looped_pair):
    """Test that one reachable sink component is refused by the self-loop route"""
    assert l_count(auxiliary_system(looped_pair)) == 1
    with pytest.raises(PreconditionError):
        polycase_selfloop(looped_pair)


def test_fallback_on_single_sink(looped_pair):
    """Test that the fallback measures the sink state only"""
    result = polycase(looped_pair)
    assert result.method == "polycase_fallback"
    assert result.measured_states == (2,)
    assert is_gsio(result.apply_to(looped_pair))


def test_fallback_needs_single_sink(branch):
    """Test that the fallback refuses systems with two reachable sink components"""
    with pytest.raises(PreconditionError):
        polycase_fallback(branch)


def _random_selfloop_systems(count: int, seed: int):
    rng = np.random.default_rng(seed)
    for index in range(count):
        n = int(rng.integers(1, 8))
        yield gen_random(n, 1, float(rng.choice([0.1, 0.25, 0.4])), dedicated_inputs=True, self_loops=True, seed=index)


def _selfloop_systems_where(accept, wanted: int, seed: int, max_draws: int = 20000):
    """First `wanted` random self-looped single-input systems passing `accept`"""
    rng = np.random.default_rng(seed)
    found = []
    for index in range(max_draws):
        n = int(rng.integers(3, 10))
        density = float(rng.choice([0.1, 0.2, 0.3]))
        system = gen_random(n, 1, density, dedicated_inputs=True, self_loops=True, seed=seed * max_draws + index)
        if accept(system):
            found.append(system)
            if len(found) == wanted:
                return found
    raise AssertionError(f"Only {len(found)} of {wanted} systems found in {max_draws} draws")


def test_selfloop_route_is_optimal():
    """Test the self-loop route against exhaustive placement on two hundred multi-sink systems"""
    systems = _selfloop_systems_where(lambda s: l_count(auxiliary_system(s)) > 1, 200, seed=41)
    for system in systems:
        result = polycase_selfloop(system)
        assert is_gsio(result.apply_to(system))
        assert result.total_count == exact_min(system).total_count, system.to_dict()


def test_direct_variant_is_optimal():
    """Test the input-adjoined route against exhaustive placement with input sensors"""
    systems = _selfloop_systems_where(lambda s: l_count(input_adjoined(s)) > 1, 200, seed=43)
    for system in systems:
        result = polycase_selfloop(system, direct_measure=True)
        assert is_gsio(result.apply_to(system))
        assert result.total_count == exact_min(system, allow_input_measure=True).total_count, system.to_dict()


def test_fallback_is_optimal():
    """Test that fallback placements on single-sink systems match the exhaustive optimum"""
    systems = _selfloop_systems_where(lambda s: l_count(auxiliary_system(s)) == 1, 100, seed=47)
    for system in systems:
        result = polycase_fallback(system)
        assert is_gsio(result.apply_to(system))
        assert result.total_count == exact_min(system).total_count, system.to_dict()


def test_single_state_fallback():
    """Test that a lone self-looped state is measured"""
    system = StructuredSystem.create(
        SparsityPattern.identity(1), SparsityPattern.identity(1), dedicated_inputs=True
    )
    assert polycase(system).measured_states == (1,)


def test_l_count_fork():
    """Test a fork from the input into two self-looped sinks"""
    system = StructuredSystem.create(
        SparsityPattern.from_entries(3, 3, [(1, 1), (2, 2), (3, 3), (2, 1), (3, 1)]),
        SparsityPattern.from_entries(3, 1, [(1, 1)]),
        dedicated_inputs=True,
    )
    assert l_count(auxiliary_system(system)) == 2
    assert polycase(system).measured_states == (2, 3)


def test_selfloop_route_within_one_of_h():
    """Test that the self-loop route uses H(Â) or H(Â)+1 sensors"""
    for system in _random_selfloop_systems(100, 53):
        a_hat = auxiliary_system(system)
        if l_count(a_hat) <= 1:
            continue
        h = min_struct_obs(a_hat, candidates=range(1, system.n + 1)).count
        assert polycase_selfloop(system).total_count in (h, h + 1)


def test_essential_states_ignore_sink_choice():
    """Test that every minimum sink placement gives the same essential states"""
    checked = 0
    for system in _random_selfloop_systems(60, 59):
        a_hat = auxiliary_system(system)
        if l_count(a_hat) <= 1:
            continue
        n = system.n
        minobs = min_struct_obs(a_hat, candidates=range(1, n + 1))
        if minobs.count != minobs.sink_count:
            continue
        h = minobs.count
        essential = set()
        for sensors in combinations(range(1, n + 1), h):
            output = build_output_pattern(sensors, n + 1)
            if not check_struct_obs(a_hat, output).overall:
                continue
            digraph = SystemDigraph.from_patterns(a_hat, None, output)
            states = frozenset(
                v for v in v_ess(digraph, [x(n + 1)], digraph.outputs) if v.kind is VertexKind.STATE
            )
            essential.add(states)
        checked += 1
        assert len(essential) == 1, system.to_dict()
    assert checked > 0
