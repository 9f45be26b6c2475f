import pytest
from pathlib import Path

from src.services.catalog import (
    four_group_cover,
    input_bottleneck,
    selfloop_branch,
    small_plant,
    triangle_cover,
)

DATA_DIR = Path(__file__).parent.parent / "data"


@pytest.fixture
def data_dir():
    """Fixture pointing at the JSON fixtures shipped with the repository"""
    return DATA_DIR


@pytest.fixture
def plant():
    """Five-state plant without sensors"""
    return small_plant()


@pytest.fixture
def measured_plant():
    """Five-state plant with its sensor on x5"""
    return small_plant(with_output=True)


@pytest.fixture
def branch():
    """Self-looped single-input system with two sink components"""
    return selfloop_branch()


@pytest.fixture
def four_groups():
    """Sixteen-state system whose stage 2 is a set cover"""
    return four_group_cover()


@pytest.fixture
def bottleneck():
    """Input bottleneck with k = 2"""
    return input_bottleneck(2)


@pytest.fixture
def triangle():
    """Set cover with three pairwise overlapping subsets"""
    return triangle_cover()
