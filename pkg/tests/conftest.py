import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

from fasttsnet.graph import Graph, is_connected  # noqa: E402


@st.composite
def connected_graphs(draw, min_n=2, max_n=12):
    """Random spanning tree plus extra random edges."""
    n = draw(st.integers(min_n, max_n))
    edges = [(draw(st.integers(0, v - 1)), v) for v in range(1, n)]
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n))
    edges += [(a, b) for a, b in extra if a != b]
    g = Graph.from_edges(n, edges)
    assert is_connected(g)
    return g


def random_connected_graph(rng: np.random.Generator, n: int, extra: int = 0) -> Graph:
    edges = [(int(rng.integers(v)), v) for v in range(1, n)]
    for _ in range(extra):
        a, b = rng.integers(n, size=2)
        if a != b:
            edges.append((int(a), int(b)))
    return Graph.from_edges(n, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_criteria: dict = {}


@pytest.fixture
def criterion():
    """Record one summary line per acceptance criterion (printed at session end)."""

    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}"
        _criteria[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_criteria):
            terminalreporter.write_line(_criteria[number])
