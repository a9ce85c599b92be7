import numpy as np
import pytest

from gcal.graph import Graph


def make_graph(n, edges, labels=None, m=1, features=None, num_classes=None):
    if features is None:
        features = np.zeros((n, m))
    return Graph.from_edges(n, np.array(edges, dtype=np.int64).reshape(-1, 2), features, labels, num_classes)


def random_graph(rng, n, p, m=3, num_classes=3):
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    edges = np.stack([iu[keep], ju[keep]], axis=1)
    return Graph.from_edges(n, edges, rng.normal(size=(n, m)), rng.integers(num_classes, size=n), num_classes)


@pytest.fixture
def triangle():
    return make_graph(3, [(0, 1), (1, 2), (0, 2)], labels=[0, 0, 1])


@pytest.fixture
def path4():
    return make_graph(4, [(0, 1), (1, 2), (2, 3)], labels=[0, 0, 1, 1])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# One "PASS/FAIL/SKIP <criterion>: <detail>" line per acceptance criterion,
# filled by test_acceptance.py and echoed at the end of the session.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
