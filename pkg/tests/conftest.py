import numpy as np
import pytest

from szegokit.geometry import boundary_grid, make_preset_domain
from szegokit.potential import PotentialSystem
from szegokit.szego import admissible_base


@pytest.fixture(scope="session")
def disc():
    return make_preset_domain("disc", [1.0])


@pytest.fixture(scope="session")
def annulus():
    return make_preset_domain("annulus", [0.5])


@pytest.fixture(scope="session")
def blob3():
    return make_preset_domain("blob3", [0.05, 0.1])


@pytest.fixture(scope="session")
def disc_grid(disc):
    return boundary_grid(disc, 128)


@pytest.fixture(scope="session")
def annulus_grid(annulus):
    return boundary_grid(annulus, 256)


@pytest.fixture(scope="session")
def blob3_grid(blob3):
    return boundary_grid(blob3, 256)


@pytest.fixture(scope="session")
def annulus_basis(annulus_grid):
    return admissible_base(annulus_grid, 0.7, 0.6j)


@pytest.fixture(scope="session")
def blob3_basis(blob3_grid):
    return admissible_base(blob3_grid, 0.1 + 0.1j, -0.016 - 0.448j)


@pytest.fixture(scope="session")
def disc_sys(disc_grid):
    return PotentialSystem(disc_grid, admissible_base(disc_grid, 0.0, 0.0))


@pytest.fixture(scope="session")
def annulus_sys(annulus_grid, annulus_basis):
    return PotentialSystem(annulus_grid, annulus_basis)


@pytest.fixture(scope="session")
def blob3_sys(blob3_grid, blob3_basis):
    return PotentialSystem(blob3_grid, blob3_basis)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance")), None)
    if mod is not None and getattr(mod, "LINES", None):
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)
