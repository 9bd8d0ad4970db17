import math

import pytest
from hypothesis import HealthCheck, settings

from parachain.model import ChainParams

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def topo_params():
    """Reference topological point: J = Delta = g = gamma = 1, dphi = pi/4."""
    return ChainParams(n_sites=20, delta=1.0, g=1.0, gamma=1.0, delta_phi=math.pi / 4)


_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line (PASS/FAIL plus measured values) and assert on it."""

    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}"
        request.config.stash[_LINES].append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
