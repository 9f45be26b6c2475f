from itertools import combinations

import numpy as np
import pytest

from src.models.pattern import SparsityPattern, build_output_pattern
from src.models.placement import BoundsVariant, SensorStage
from src.models.system import StructuredSystem
from src.services.bounds import (
    auxiliary_system,
    bounds_dedicated,
    bounds_direct_measure,
    min_struct_obs,
)
from src.services.catalog import input_bottleneck
from src.services.instances import gen_random
from src.services.placement import exact_min
from src.services.verify import check_struct_obs, is_gsio
from src.utils.errors import InfeasibleError, PreconditionError


def _brute_force_minobs(a_obs: SparsityPattern) -> int:
    n = a_obs.rows
    for size in range(n + 1):
        for states in combinations(range(1, n + 1), size):
            if check_struct_obs(a_obs, build_output_pattern(states, n)).overall:
                return size
    raise AssertionError("measuring every state must suffice")


def test_auxiliary_plant(plant):
    """Test that the input becomes x6 and the edge into x1 is cut"""
    a_hat = auxiliary_system(plant)
    assert a_hat.shape == (6, 6)
    assert a_hat.entries() == [(1, 6), (2, 1), (2, 2), (3, 4), (4, 1), (4, 2), (5, 3), (5, 4)]


def test_auxiliary_needs_dedicated_inputs():
    """Test that a shared input is rejected"""
    system = StructuredSystem.create(
        SparsityPattern.identity(2), SparsityPattern.from_entries(2, 1, [(1, 1), (2, 1)])
    )
    with pytest.raises(PreconditionError):
        auxiliary_system(system)
    with pytest.raises(PreconditionError):
        bounds_dedicated(system)


def test_minobs_on_auxiliary_plant(plant):
    """Test H(Â) = 1 with the sensor on x5"""
    result = min_struct_obs(auxiliary_system(plant), candidates=range(1, 6))
    assert result.count == 1
    assert result.witness == (5,)
    assert result.deficiency == 1
    assert result.sink_count == 1
    assert result.to_dict()["H"] == 1


def test_minobs_restricted_infeasible():
    """Test that an unmatched state outside the candidates is reported"""
    with pytest.raises(InfeasibleError):
        min_struct_obs(SparsityPattern.zeros(2, 2), candidates=[1])
    with pytest.raises(ValueError):
        min_struct_obs(SparsityPattern.zeros(2, 3))


def test_minobs_diagonal():
    """Test that self-loops alone need one sensor per state"""
    result = min_struct_obs(SparsityPattern.identity(3))
    assert result.count == 3
    assert result.deficiency == 0


def test_minobs_matches_brute_force():
    """Test H against exhaustive search on 200 random patterns"""
    rng = np.random.default_rng(23)
    for seed in range(200):
        n = int(rng.integers(1, 9))
        mask = rng.random((n, n)) < float(rng.choice([0.1, 0.25, 0.4]))
        a_obs = SparsityPattern(n, n, frozenset((int(r) + 1, int(c) + 1) for r, c in zip(*np.nonzero(mask))))
        result = min_struct_obs(a_obs)
        assert result.count == _brute_force_minobs(a_obs), a_obs.to_list()
        assert check_struct_obs(a_obs, build_output_pattern(result.witness, n)).overall


def test_plant_bounds(plant):
    """Test both interval variants on the plant"""
    dedicated = bounds_dedicated(plant)
    assert (dedicated.lower, dedicated.upper) == (1, 2)
    assert dedicated.variant is BoundsVariant.DEDICATED
    assert dedicated.witness.measured_states == (1, 5)
    assert dedicated.witness.states_in(SensorStage.EXTRA) == [1]

    direct = bounds_direct_measure(plant)
    assert (direct.lower, direct.upper) == (1, 2)
    assert direct.witness.measured_inputs == (1,)
    assert direct.contains(exact_min(plant, allow_input_measure=True).total_count)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_input_bottleneck_hits_upper_bound(k):
    """Test that the bottleneck family needs the upper end of its interval"""
    system = input_bottleneck(k)
    bounds = bounds_dedicated(system)
    assert (bounds.lower, bounds.upper) == (k + 1, k + 2)
    assert exact_min(system).total_count == k + 2
    assert is_gsio(system.with_sensors(list(range(1, k + 1)) + [k + 2, k + 3]))


def test_bounds_sandwich_exact_optimum():
    """Test both intervals against exhaustive placement on 200 random systems"""
    rng = np.random.default_rng(31)
    for seed in range(200):
        n = int(rng.integers(2, 9))
        q = int(rng.integers(1, min(2, n) + 1))
        system = gen_random(n, q, float(rng.choice([0.15, 0.3, 0.5])), dedicated_inputs=True, seed=seed)

        dedicated = bounds_dedicated(system)
        assert dedicated.contains(exact_min(system).total_count), system.to_dict()
        assert is_gsio(dedicated.witness.apply_to(system))

        direct = bounds_direct_measure(system)
        assert direct.contains(exact_min(system, allow_input_measure=True).total_count), system.to_dict()
        assert is_gsio(direct.witness.apply_to(system))
