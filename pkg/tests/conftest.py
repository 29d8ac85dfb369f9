import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from homwave.config import RunConfig  # noqa: E402
from homwave.datasets import grid_1d, reference_space  # noqa: E402
from homwave.lattice import assign_parents, build_cubes, build_nets  # noqa: E402
from homwave.pipeline import build_artifacts  # noqa: E402
from homwave.splines import estimate_splines  # noqa: E402
from homwave.space import MetricMeasureSpace  # noqa: E402
from homwave.wavelets import build_wavelets  # noqa: E402

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def grid_artifacts():
    """Default pipeline on the 1024-point unit-interval grid."""
    return build_artifacts(RunConfig())


@pytest.fixture(scope="session")
def grid256():
    return grid_1d(256)


@pytest.fixture(scope="session")
def small_pipeline():
    """A 64-point grid with every artifact built; fast enough for many tests."""
    space = grid_1d(64)
    nets = build_nets(space, 0.25)
    system = build_cubes(nets, assign_parents(nets, "nearest"))
    splines = estimate_splines(space, nets, R=128, seed=3)
    basis = build_wavelets(splines, system)
    return space, nets, system, splines, basis


@pytest.fixture(scope="session")
def reference():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = reference_space(name)
        return cache[name]

    return get


def random_space(rng, n, dim=1):
    coords = rng.random((n, dim))
    weights = rng.uniform(0.5, 2.0, size=n)
    return MetricMeasureSpace.from_coords(coords, weights / weights.sum())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
