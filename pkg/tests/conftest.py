"""Shared fixtures; the expensive ones are built once per session."""

import numpy as np
import pytest

from bilip.action import approximate_minimal_set, default_schottky, gap_stabilizer_search
from bilip.extension import extend_circle, stabilized_gap_seed


@pytest.fixture(scope="session")
def schottky():
    return default_schottky()


@pytest.fixture(scope="session")
def gaps(schottky):
    return approximate_minimal_set(schottky.action, 8)


@pytest.fixture(scope="session")
def stabilized_gap(schottky, gaps):
    found = gap_stabilizer_search(schottky.action, gaps.largest(), 6)
    assert found is not None
    return found


@pytest.fixture(scope="session")
def circle_ext(schottky, stabilized_gap):
    w, gap = stabilized_gap
    I = gap.interval
    seed = stabilized_gap_seed(schottky.action, I, w, 2.0, 30)
    return extend_circle(schottky.action, I, seed, w, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
