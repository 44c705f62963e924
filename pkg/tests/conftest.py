import pytest

from clipshape import families
from clipshape.constellation import make_60qam, make_square_qam


@pytest.fixture(scope="session")
def qam64():
    return make_square_qam(64)


@pytest.fixture(scope="session")
def qam60():
    return make_60qam()


@pytest.fixture(scope="session")
def qpsk():
    return make_square_qam(4)


@pytest.fixture(scope="session")
def family():
    """Shaped 64QAM inputs shared by the slower tests, built once per session."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = families.build(name)
        return cache[name]

    return get


@pytest.fixture(scope="session")
def optima(family):
    """B2B and E2E optimizer results on the default spec and scenario, computed once."""
    import os

    from clipshape.clipopt import DEFAULT_K_GRID, optimize_b2b, optimize_e2e
    from clipshape.linkmodel import LinkScenario
    from clipshape.waveform import WaveformSpec

    workers = min(8, os.cpu_count() or 1)
    cache = {}

    def get(name):
        if name not in cache:
            c = family(name)
            spec, scenario = WaveformSpec(), LinkScenario()
            cache[name] = (optimize_b2b(c, spec, DEFAULT_K_GRID),
                           optimize_e2e(c, spec, scenario, DEFAULT_K_GRID, workers=workers))
        return cache[name]

    return get


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
