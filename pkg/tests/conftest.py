import itertools
from collections import deque

import pytest

ACCEPTANCE_LINES = []


def brute_clustering(adjacency):
    """Mean local clustering by explicit neighbour-pair enumeration."""
    total = 0.0
    for v, nbrs in enumerate(adjacency):
        d = len(nbrs)
        if d < 2:
            continue
        links = sum(1 for a, b in itertools.combinations(sorted(nbrs), 2) if b in adjacency[a])
        total += links / (d * (d - 1) / 2)
    return total / len(adjacency)


def brute_path_length(adjacency):
    """Mean hop distance over unordered connected pairs using deque BFS."""
    total, pairs = 0, 0
    for s in range(len(adjacency)):
        dist = {s: 0}
        q = deque([s])
        while q:
            u = q.popleft()
            for w in adjacency[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    q.append(w)
        total += sum(dist.values())
        pairs += len(dist) - 1
    return total / pairs


def ring_clustering(k):
    return 3 * (k - 2) / (4 * (k - 1))


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""
    def _record(name, ok, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
