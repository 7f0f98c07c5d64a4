import numpy as np
import pytest

from kuracluster.config import load_config
from kuracluster.graph import build_digraph, make_partition
from kuracluster.model import NetworkSpec
from kuracluster.rules import hebbian_cos


@pytest.fixture(scope="session")
def ex1():
    return load_config("example1.json")


@pytest.fixture(scope="session")
def ex2():
    return load_config("example2.json")


def random_clustered_network(rng, n_max=8, m_max=3, mu=0.01, mu_tilde=0.02, gamma=0.5):
    """Random digraph and partition with equal in-cluster frequencies and uniform
    inter-cluster in-degrees, so that both existence preconditions hold."""
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, min(m_max, n) + 1))
    labels = np.concatenate([np.arange(m), rng.integers(0, m, n - m)])
    rng.shuffle(labels)
    clusters = [np.nonzero(labels == s)[0].tolist() for s in range(m)]
    adj = np.zeros((n, n), dtype=np.int64)
    for s, cs in enumerate(clusters):
        for i in cs:
            for j in cs:
                if i != j and rng.random() < 0.6:
                    adj[i, j] = 1
        for r, cr in enumerate(clusters):
            if r == s:
                continue
            d = int(rng.integers(0, len(cr) + 1))
            for i in cs:
                adj[i, rng.choice(cr, size=d, replace=False)] = 1
    reps = [int(rng.choice(c)) for c in clusters]
    p = make_partition(clusters, reps, n=n)
    omega = rng.uniform(0.5, 1.5, m)[labels]
    spec = NetworkSpec(build_digraph(adj), omega, gamma, mu, mu_tilde, hebbian_cos(), p)
    return spec, p


_criteria = []


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    ok = call.excinfo is None
    _criteria.append((marker.args[0], marker.args[1], ok))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid, text, ok in _criteria:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {cid}: {text}")
