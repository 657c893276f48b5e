import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from oracles import random_graph  # noqa: E402


@pytest.fixture(scope="session")
def corpus30():
    """Fixed strongly connected 30-node weighted digraph."""
    rng = random.Random(30)
    while True:
        g = random_graph(rng, 30, 0.12, weighted=True, undirected=False)
        from oracles import all_pairs

        if all(len(d) == 30 for d in all_pairs(g)):
            return g


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
