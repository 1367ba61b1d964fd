import numpy as np
import pytest

from fuzzysched.fuzzy import OutputPartition, TriangularMf, make_fis_pair
from fuzzysched.scenario import N_SLOTS, Scenario, WorkerSpec
from fuzzysched.scenario_io import generate_pool, generate_scenario


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="opt-in: pass --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


STANDARD_OUTPUT = OutputPartition(tuple(
    TriangularMf(max(0.0, p - 0.25), p, min(1.0, p + 0.25)) for p in (0.0, 0.25, 0.5, 0.75, 1.0)
))


def constant_pair(k1=3, k2=3, output=STANDARD_OUTPUT):
    """FIS pair whose every FIS1 rule points at ``k1`` and every FIS2 rule at ``k2``."""
    return make_fis_pair([[k1] * 4] * 4, [[k2] * 3] * 3, output)


def likelihood_pair(p1, p2):
    """Pair with constant outputs ``p1`` (FIS1) and ``p2`` (FIS2)."""
    peaks = sorted([0.0, 0.05, p1, p2, 0.95])
    mfs = tuple(TriangularMf(p - 0.05, p, p + 0.05) if 0.05 <= p <= 0.95 else TriangularMf(p, p, p)
                for p in peaks)
    out = OutputPartition(mfs)
    return make_fis_pair([[peaks.index(p1) + 1] * 4] * 4, [[peaks.index(p2) + 1] * 3] * 3, out)


def make_scenario(availability, weekly=10, shift=4, limit=25, coverage=4):
    availability = np.asarray(availability)
    n = len(availability)
    weekly = np.broadcast_to(weekly, n)
    shift = np.broadcast_to(shift, n)
    workers = tuple(WorkerSpec(f"w{i}", int(weekly[i]), int(shift[i]), limit) for i in range(n))
    return Scenario(workers, availability, coverage)


@pytest.fixture
def standard_output():
    return STANDARD_OUTPUT


@pytest.fixture(scope="session")
def pool40():
    return generate_pool(40, rng=np.random.default_rng(1234))


@pytest.fixture(scope="session")
def scenarios20(pool40):
    return [generate_scenario(pool40, 20, np.random.default_rng([99, i])) for i in range(5)]


@pytest.fixture
def full_availability():
    return np.ones((6, N_SLOTS), dtype=int)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
