"""Shared brute-force helpers for the test suite.

These are the independent oracles: everything here favors obviousness over
speed and never calls the code paths it is used to check.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest


def all_pairs(n):
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


def iter_labeled_graphs(n):
    """All labeled simple graphs on n vertices as edge tuples."""
    pairs = all_pairs(n)
    for r in range(len(pairs) + 1):
        yield from itertools.combinations(pairs, r)


def is_connected_edges(edges, n) -> bool:
    if n == 1:
        return True
    adj = {v: set() for v in range(n)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen = {0}
    stack = [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def canonical_form(edges, n):
    """Lexicographically least edge set over all vertex relabelings."""
    best = None
    for perm in itertools.permutations(range(n)):
        relabeled = tuple(sorted(tuple(sorted((perm[u], perm[v]))) for u, v in edges))
        if best is None or relabeled < best:
            best = relabeled
    return best


def connected_graphs_up_to(nmax):
    """Non-isomorphic connected graphs on 1..nmax vertices: [(n, edges)]."""
    out = []
    for n in range(1, nmax + 1):
        seen = set()
        for edges in iter_labeled_graphs(n):
            if not is_connected_edges(edges, n):
                continue
            key = canonical_form(edges, n)
            if key not in seen:
                seen.add(key)
                out.append((n, tuple(key)))
    return out


def simple_graphs_with_degrees(degrees):
    """All labeled simple graphs realizing the degree sequence, as frozensets."""
    n = len(degrees)
    hits = []
    for edges in iter_labeled_graphs(n):
        deg = [0] * n
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        if deg == list(degrees):
            hits.append(frozenset(edges))
    return hits


def havel_hakimi_graphical(degrees) -> bool:
    """Constructive graphical test, independent of the Erdos-Gallai route."""
    seq = sorted((int(d) for d in degrees), reverse=True)
    if any(d < 0 for d in seq):
        return False
    while seq and seq[0] > 0:
        d = seq.pop(0)
        if d > len(seq):
            return False
        for i in range(d):
            seq[i] -= 1
            if seq[i] < 0:
                return False
        seq.sort(reverse=True)
    return True


def apsp_distances(edges, n):
    """All-pairs shortest paths by repeated relaxation (small n only)."""
    inf = float("inf")
    dist = [[0 if i == j else inf for j in range(n)] for i in range(n)]
    for u, v in edges:
        dist[u][v] = dist[v][u] = 1
    for k in range(n):
        for i in range(n):
            dik = dist[i][k]
            if dik == inf:
                continue
            row_k = dist[k]
            row_i = dist[i]
            for j in range(n):
                alt = dik + row_k[j]
                if alt < row_i[j]:
                    row_i[j] = alt
    return dist


def random_gnp_edges(rng, n, p):
    return [(u, v) for (u, v) in all_pairs(n) if rng.random() < p]


@pytest.fixture(scope="session")
def small_graph_zoo():
    """A frozen family of small random graphs used by several property tests."""
    from outbreak_local import build_graph

    rng = np.random.default_rng(20240811)
    zoo = []
    for n in (4, 6, 8, 10, 12):
        for p in (0.25, 0.5):
            for _ in range(3):
                edges = random_gnp_edges(rng, n, p)
                zoo.append(build_graph(edges, n))
    return zoo
