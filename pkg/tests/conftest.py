import warnings

import pytest

from wavesplit.core import Grid, TrapParams


@pytest.fixture(scope="session")
def trap():
    return TrapParams()


@pytest.fixture(scope="session")
def wide_grid(trap):
    """Grid for separations up to |d| = 24 at the default spacing."""
    return Grid.for_separation(trap, 24.0)


@pytest.fixture(scope="session")
def split_runs():
    """Cache of full splitting runs keyed by protocol; each takes seconds."""
    from wavesplit.protocol import run_split

    cache = {}

    def get(sp):
        if sp not in cache:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cache[sp] = run_split(sp, warn=False)
        return cache[sp]
    return get


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
