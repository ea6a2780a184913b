"""Shared fixtures: small molecules and the bundled water integrals."""

from pathlib import Path

import pytest

from ion_vqe.config import RunConfig
from ion_vqe.hamiltonian import fci_ground_state, load_fcidump, parse_fcidump
from tests.helpers import H2_FCIDUMP, random_molecule


@pytest.fixture
def h2():
    return parse_fcidump(H2_FCIDUMP)


@pytest.fixture
def h2_path(tmp_path) -> Path:
    path = tmp_path / "h2.fcidump"
    path.write_text(H2_FCIDUMP, encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def toy():
    """4 MOs, 4 electrons: small enough for dense checks, has non-bosonic excitations."""
    return random_molecule(4, 4, seed=11)


@pytest.fixture(scope="session")
def toy_fci(toy):
    return fci_ground_state(toy)


@pytest.fixture(scope="session")
def water_path(tmp_path_factory) -> Path:
    """Bundled H2O/STO-3G integrals, regenerated with pyscf when the file is absent."""
    path = RunConfig().fcidump
    if path.exists():
        return path
    pytest.importorskip("pyscf")
    from ion_vqe.fcidump_gen import generate_h2o

    out = tmp_path_factory.mktemp("data") / "h2o_sto3g.fcidump"
    generate_h2o(out)
    return out


@pytest.fixture(scope="session")
def water(water_path):
    return load_fcidump(water_path)


@pytest.fixture(scope="session")
def water_fci(water):
    return fci_ground_state(water)
