import sys
from pathlib import Path

import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from slpencil.config import InverseConfig, SolverConfig  # noqa: E402
from slpencil.problem_io import load_problem  # noqa: E402

PROBLEM_DIR = project_root / "data" / "problems"
CORPUS = ["corpus_00", "corpus_11", "corpus_02", "corpus_m11", "corpus_20"]


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical experiment")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow option to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def problem_dir():
    return PROBLEM_DIR


@pytest.fixture(scope="session")
def solver_config():
    return SolverConfig()


@pytest.fixture(scope="session")
def fast_inverse_config():
    return InverseConfig(n_data=12, base_K=6, max_iter=30)


@pytest.fixture(scope="session")
def dirichlet_zero():
    return load_problem(PROBLEM_DIR / "dirichlet_zero.yaml")


@pytest.fixture(scope="session")
def neumann_zero():
    return load_problem(PROBLEM_DIR / "neumann_zero.yaml")


@pytest.fixture(scope="session")
def corpus():
    return {name: load_problem(PROBLEM_DIR / f"{name}.yaml") for name in CORPUS}


@pytest.fixture(params=CORPUS)
def corpus_problem(request):
    return load_problem(PROBLEM_DIR / f"{request.param}.yaml")
