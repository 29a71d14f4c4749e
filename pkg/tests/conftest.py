import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wavegate.grids import TimeGrid


@pytest.fixture
def sim_tgrid():
    return TimeGrid(4096, 0.01)


@pytest.fixture
def sim_fgrid(sim_tgrid):
    return sim_tgrid.conjugate()


@pytest.fixture
def scan():
    return TimeGrid(585, 0.02)
