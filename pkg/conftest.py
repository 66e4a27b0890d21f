# conftest.py
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from config_loader import load_config  # noqa: E402
from equilibrium_solver import MODEL_BENDING, MODEL_RIGID, SolverOptions  # noqa: E402
from geometry import section_properties  # noqa: E402
from pullin_detector import find_pullin  # noqa: E402

CONFIGS = ROOT / "configs"


@pytest.fixture(scope="session")
def configs_dir() -> Path:
    return CONFIGS


@pytest.fixture(scope="session")
def reference_config():
    return load_config(CONFIGS / "reference.json")


@pytest.fixture(scope="session")
def reference_props(reference_config):
    return section_properties(reference_config)


@pytest.fixture(scope="session")
def rigid_config():
    return load_config(CONFIGS / "rigid_benchmark.json")


@pytest.fixture(scope="session")
def rigid_props(rigid_config):
    return section_properties(rigid_config)


@pytest.fixture(scope="session")
def reference_pullin_bending(reference_config, reference_props):
    return find_pullin(reference_config, reference_props, SolverOptions(), MODEL_BENDING)


@pytest.fixture(scope="session")
def reference_pullin_rigid(reference_config, reference_props):
    return find_pullin(reference_config, reference_props, SolverOptions(), MODEL_RIGID)
