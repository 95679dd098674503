import numpy as np
import pytest

from epdsys.bench import RunConfig, grid_spec_for, manufactured_problem
from epdsys.grid import build_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def ref_config():
    """The reference-experiment config at pure defaults (J=24)."""
    return RunConfig(J=24)


@pytest.fixture
def ref_grid24(ref_config):
    return build_grid(grid_spec_for(ref_config, 24))


@pytest.fixture
def ref_problem(ref_config):
    return manufactured_problem(ref_config)
