import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from dipolespec.angular import AngularPotential, PolarGrid, full_spectrum
from dipolespec.radial import RadialGrid


@pytest.fixture(scope="session")
def dipole3_spectrum():
    """N=3 dipole at unit coupling, enough modes for field work."""
    grid = PolarGrid.build(3, 800)
    return full_spectrum(3, AngularPotential.dipole(1.0), 40, grid)


@pytest.fixture(scope="session")
def free3_spectrum():
    grid = PolarGrid.build(3, 600)
    return full_spectrum(3, AngularPotential.constant(0.0), 60, grid)


@pytest.fixture(scope="session")
def radial_grid():
    return RadialGrid.geometric(400, 1e-8, 1.0)
