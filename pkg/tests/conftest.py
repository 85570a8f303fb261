import numpy as np
import pytest

from cellquant.channel import BinaryPrior, ChannelSpec, PosteriorGrid, discretize, gaussian

# Fixed seeds for every randomized test, so failures reproduce exactly.
SEEDS = {
    "oracle_equivalence": 20240611,
    "identity": 7,
    "rearrange": 11,
    "centroid": 13,
    "kl_gap": 17,
    "scan": 19,
    "frontier": 23,
    "backends": 29,
}


def random_grid(rng, m, *, ties=False):
    r = rng.uniform(0.0, 1.0, size=m)
    if ties:
        r = np.round(r * 4) / 4
    mass = rng.uniform(0.05, 1.0, size=m)
    return PosteriorGrid.from_atoms(r, mass)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def biawgn():
    ch = ChannelSpec(BinaryPrior(0.5), gaussian(1.0, 1.0), gaussian(-1.0, 1.0))
    return ch, discretize(ch, -4.0, 4.0, 200)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
