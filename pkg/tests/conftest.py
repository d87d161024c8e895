"""Shared test oracles, independent of the library's algorithms."""
import itertools
import math

import numpy as np
import pytest


def brute_force_min_cut(n_nodes, edges, caps, s, t):
    """Exhaustive minimum over all bipartitions separating s from t."""
    best = math.inf
    for mask in range(1 << n_nodes):
        if not (mask >> s) & 1 or (mask >> t) & 1:
            continue
        val = 0.0
        for (u, v), c in zip(edges, caps):
            if ((mask >> u) & 1) != ((mask >> v) & 1):
                val += c
        best = min(best, val)
    return best


def enumerate_shortest_path(n_nodes, edges, lengths, s, t):
    """Shortest s-t length via exhaustive simple-path enumeration."""
    adj = {u: [] for u in range(n_nodes)}
    for (u, v), w in zip(edges, lengths):
        adj[u].append((v, w))
        adj[v].append((u, w))
    best = [math.inf]

    def walk(u, dist, seen):
        if u == t:
            best[0] = min(best[0], dist)
            return
        for v, w in adj[u]:
            if v not in seen:
                walk(v, dist + w, seen | {v})

    walk(s, 0.0, {s})
    return best[0]


def random_geometric_instance(rng, n_max=8, edge_prob=0.5, box=100.0):
    """A random spatial graph as raw arrays (n, coords, edges)."""
    n = int(rng.integers(2, n_max + 1))
    coords = rng.uniform(-box, box, size=(n, 2))
    edges = [
        (u, v)
        for u, v in itertools.combinations(range(n), 2)
        if rng.random() < edge_prob
    ]
    return n, coords, np.array(edges, dtype=np.int64).reshape(-1, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
