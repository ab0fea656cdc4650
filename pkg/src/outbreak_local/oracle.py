"""Brute-force ground truth on tiny graphs by enumerating all edge masks.

Everything here is deliberately naive: sum p^|S| (1-p)^(m-|S|) over all 2^m
open-edge subsets S, grouped by the quantity of interest. With a Fraction
retention probability the law is exact rational arithmetic; with a float it
is compensated floating summation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import fsum

import numpy as np

from .graph import Graph, bfs_distances

MAX_ORACLE_EDGES = 24


class OracleCapError(ValueError):
    """Graph has too many edges for 2^m enumeration."""


@dataclass(frozen=True)
class ExactLaw:
    """A finitely supported law with exact or near-exact probabilities."""

    support: tuple[int, ...]
    probabilities: tuple  # Fractions (rational mode) or floats
    rational: bool

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probabilities))

    def prob_of(self, value: int):
        try:
            return self.probabilities[self.support.index(value)]
        except ValueError:
            return Fraction(0) if self.rational else 0.0

    def mean(self) -> float:
        return float(sum(v * p for v, p in zip(self.support, self.probabilities)))

    def total(self):
        if self.rational:
            return sum(self.probabilities, Fraction(0))
        return fsum(self.probabilities)

    def tv_distance(self, empirical: dict) -> float:
        """Total variation distance to an empirical {value: frequency} dict."""
        keys = set(self.support) | set(empirical)
        me = self.as_dict()
        return 0.5 * fsum(abs(float(me.get(k, 0)) - float(empirical.get(k, 0.0))) for k in keys)


def _check_cap(g: Graph) -> None:
    if g.m > MAX_ORACLE_EDGES:
        raise OracleCapError(f"m={g.m} exceeds enumeration cap {MAX_ORACLE_EDGES}")


def _reach_all_masks(g: Graph, sources) -> np.ndarray:
    """visited[v, S] = v reachable from `sources` using only edges open in S."""
    _check_cap(g)
    nmask = 1 << g.m
    s = np.arange(nmask, dtype=np.uint32)
    visited = np.zeros((g.n, nmask), dtype=bool)
    for v in np.unique(np.asarray(sources, dtype=np.int64)):
        visited[v] = True
    edges = g.edges.tolist()
    changed = True
    while changed:
        changed = False
        for e, (a, b) in enumerate(edges):
            open_e = ((s >> np.uint32(e)) & np.uint32(1)).astype(bool)
            new_b = visited[a] & open_e & ~visited[b]
            if new_b.any():
                visited[b] |= new_b
                changed = True
            new_a = visited[b] & open_e & ~visited[a]
            if new_a.any():
                visited[a] |= new_a
                changed = True
    return visited


def _popcount_masks(m: int) -> np.ndarray:
    s = np.arange(1 << m, dtype=np.uint32)
    pc = np.zeros(1 << m, dtype=np.int64)
    for e in range(m):
        pc += ((s >> np.uint32(e)) & np.uint32(1)).astype(np.int64)
    return pc


def _binomial_weights(m: int, p):
    """Weights w[s] = p^s (1-p)^(m-s), Fractions iff p is a Fraction."""
    if isinstance(p, Fraction):
        q = 1 - p
        return [p**s * q**(m - s) for s in range(m + 1)], True
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    q = 1.0 - p
    return [p**s * q**(m - s) for s in range(m + 1)], False


def _law_from_values(values: np.ndarray, pc: np.ndarray, m: int, p) -> ExactLaw:
    """Law of `values` over masks, tallied exactly by (value, open count)."""
    weights, rational = _binomial_weights(m, p)
    support = np.unique(values)
    key = np.searchsorted(support, values) * (m + 1) + pc
    counts = np.bincount(key, minlength=len(support) * (m + 1)).reshape(len(support), m + 1)
    out_support = []
    probs = []
    for i, v in enumerate(support.tolist()):
        terms = [int(counts[i, s]) * weights[s] for s in range(m + 1) if counts[i, s]]
        mass = sum(terms, Fraction(0)) if rational else fsum(terms)
        if mass == 0:  # degenerate p makes some observed values impossible
            continue
        out_support.append(int(v))
        probs.append(mass)
    return ExactLaw(tuple(out_support), tuple(probs), rational)


def exact_component_distribution(g: Graph, v: int, p) -> ExactLaw:
    """Exact law of |C(v)| under independent edge retention with probability p."""
    return exact_outbreak_distribution(g, [v], p)


def exact_outbreak_distribution(g: Graph, seeds, p) -> ExactLaw:
    """Exact law of |union of C(v_i)| over all edge masks."""
    seeds = np.asarray(seeds, dtype=np.int64).reshape(-1)
    if seeds.size == 0:
        raise ValueError("seed set must be nonempty")
    if (seeds < 0).any() or (seeds >= g.n).any():
        raise ValueError(f"seed out of range [0, {g.n})")
    visited = _reach_all_masks(g, seeds)
    sizes = visited.sum(axis=0).astype(np.int64)
    return _law_from_values(sizes, _popcount_masks(g.m), g.m, p)


def exact_zeta_k(g: Graph, v: int, k: int, p):
    """Exact probability that C(v) contains a vertex at distance >= k from v.

    Vertices unreachable in the full graph count as distance infinity but can
    never join C(v), so they do not affect the result.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    dist = bfs_distances(g, [v])
    far = np.flatnonzero((dist < 0) | (dist >= k))
    if far.size == 0:
        return Fraction(0) if isinstance(p, Fraction) else 0.0
    visited = _reach_all_masks(g, [v])
    success = visited[far].any(axis=0)
    weights, rational = _binomial_weights(g.m, p)
    pc = _popcount_masks(g.m)
    counts = np.bincount(pc[success], minlength=g.m + 1)
    terms = [int(counts[s]) * weights[s] for s in range(g.m + 1) if counts[s]]
    if rational:
        return sum(terms, Fraction(0))
    return fsum(terms)
