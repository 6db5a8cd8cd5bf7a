import numpy as np
import pytest

from mubcube.fixtures import standard_triplet
from mubcube.search import SearchConfig, experiment

EXPERIMENT_RUNS = 200
EXPERIMENT_SEED = 0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def triplet_d2():
    return standard_triplet(2)


@pytest.fixture(scope="session")
def triplet_d3():
    return standard_triplet(3)


@pytest.fixture(scope="session")
def experiment_report():
    """The 200-run search experiment, shared by every test that needs found triplets."""
    return experiment(EXPERIMENT_RUNS, SearchConfig(), jobs=None, master_seed=EXPERIMENT_SEED)


@pytest.fixture(scope="session")
def found_triplets(experiment_report):
    return [o for o in experiment_report.outcomes if o.converged]


ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = {}


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(number, passed, detail):
        lines[number] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        assert passed, detail

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
