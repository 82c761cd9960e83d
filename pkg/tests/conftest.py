import sys
from pathlib import Path

import pytest

# Add the repository root so packages import without installation
ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT))

from rd_solver.grid import SimConfig  # noqa: E402
from rd_solver.solver import run  # noqa: E402
from schemas.params_schema import (  # noqa: E402
    GridSettings,
    ModelParams,
    RunConfig,
    TimeSettings,
)


def reference_run(n: int, t_end: float, snapshot_every: float):
    config = RunConfig(
        params=ModelParams.reference(),
        grid=GridSettings(length=500.0, n=n),
        time=TimeSettings(t_end=t_end, snapshot_every=snapshot_every),
    )
    return run(SimConfig.from_run_config(config), config.params)


@pytest.fixture(scope="session")
def run_1001():
    """Reference front from the endemic/disease-free split, t in [0, 50]."""
    return reference_run(1001, 50.0, 0.5)


@pytest.fixture(scope="session")
def run_2001():
    return reference_run(2001, 50.0, 0.5)


@pytest.fixture(scope="session")
def long_run_1001():
    """Fit window t in [200, 400], past the front's relaxation toward c*."""
    return reference_run(1001, 400.0, 1.0)
