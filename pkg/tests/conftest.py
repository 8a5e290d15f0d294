import functools
import time

import numpy as np
import pytest

from pebodrem import paper_example, run_scenario

# lines printed in the terminal summary by test_acceptance
ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def paper_run(case: str, gamma: float):
    """Full 30 s paper scenario with traces; cached for the whole session."""
    model, config = paper_example(case)
    config.gamma = gamma
    start = time.perf_counter()
    run = run_scenario(model, config, keep_trace=True)
    run.elapsed = time.perf_counter() - start
    return model, run


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
