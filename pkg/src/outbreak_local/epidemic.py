"""SIR with fixed recovery time, realized through its percolation coupling.

The final infected set of the process depends only on one Bernoulli(p)
transmission indicator per edge: run the spread over the open edges and the
ever-infected set equals the union of the seed components of the masked
graph. Event order is exposed as BFS generations (Reed-Frost order).

The local ball query runs the coupled process inside the induced subgraph on
B_k(v) and reports whether at least k vertices were ever infected (seed
included; a toggle switches to the strictly-more-than-seed convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph, _dedup_unvisited, _gather_neighbors, bfs_distances, mask_bits, masked_spread
from .parallel import parallel_map
from .seeds import rng_for, substream_seed


def lambda_to_p(lam: float) -> float:
    """Per-edge transmission probability lambda/(lambda+1) of a rate-lambda
    contact process with unit recovery time."""
    if lam < 0:
        raise ValueError(f"rate must be >= 0, got {lam}")
    return lam / (lam + 1.0)


@dataclass(frozen=True)
class TransmissionParams:
    """Per-edge transmission probability, optionally derived from a rate."""

    p: float
    lam: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.lam is not None and self.p != lambda_to_p(self.lam):
            raise ValueError(f"p={self.p} inconsistent with lambda={self.lam}")

    @classmethod
    def from_rate(cls, lam: float) -> "TransmissionParams":
        return cls(p=lambda_to_p(lam), lam=lam)


@dataclass(frozen=True)
class OutbreakRecord:
    """Final state of one SIR run."""

    seeds: np.ndarray
    final_size: int
    relative_size: float
    reached_k: bool | None = None
    generations: tuple = ()  # BFS layers; layer 0 is the seed set

    def __post_init__(self):
        if not len(self.seeds):
            raise ValueError("seed set must be nonempty")


def run_sir_with_mask(g: Graph, seeds, mask) -> OutbreakRecord:
    """Deterministic SIR given transmission indicators: spread from the seeds
    over open edges; the infected set is exactly the union of the seeds'
    components in the masked graph."""
    bits = mask_bits(g, mask)
    seeds = np.asarray(seeds, dtype=np.int64).reshape(-1)
    visited, layers = masked_spread(g, seeds, bits)
    size = int(np.count_nonzero(visited))
    return OutbreakRecord(
        seeds=seeds,
        final_size=size,
        relative_size=size / g.n,
        generations=tuple(layers),
    )


def run_sir(g: Graph, seeds, params: TransmissionParams, rng: np.random.Generator) -> OutbreakRecord:
    """One SIR realization: draw one Bernoulli(p) indicator per edge, then
    spread. Consumes exactly m uniforms from `rng`."""
    bits = rng.random(g.m) < params.p
    return run_sir_with_mask(g, seeds, bits)


# ---------------------------------------------------------------------------
# local ball queries


def _percolated_spread_in_ball(
    g: Graph,
    v: int,
    p: float,
    rng: np.random.Generator,
    in_ball: np.ndarray,
) -> int:
    """Infected count of the coupled SIR inside the induced subgraph on the
    ball, drawing each induced edge's indicator lazily on first contact.

    Each edge is examined toward an unvisited endpoint at most once (the
    examining endpoint is already infected and never re-scanned), so lazy
    draws realize independent Bernoulli(p) indicators per edge.
    """
    eligible = in_ball.copy()  # in the ball and not yet infected
    eligible[v] = False
    count = 1
    frontier = np.array([v], dtype=np.int64)
    scratch = np.empty(g.n, dtype=bool)
    while frontier.size:
        nbrs = _gather_neighbors(g, frontier)
        nbrs = nbrs[eligible[nbrs]]
        if nbrs.size == 0:
            break
        hit = nbrs[rng.random(nbrs.size) < p]
        frontier = _dedup_unvisited(g, hit, scratch)
        eligible[frontier] = False
        count += frontier.size
    return count


def local_query(
    g: Graph,
    v: int,
    k: int,
    params: TransmissionParams,
    rng: np.random.Generator,
    count_seed: bool = True,
) -> int:
    """One query of the local infection probe: run the coupled SIR in
    B_k(v) from seed v; return 1 iff at least k vertices are ever infected
    (count_seed=False requires k vertices besides the seed)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    dist = bfs_distances(g, [v], limit=k)
    in_ball = dist >= 0
    infected = _percolated_spread_in_ball(g, v, params.p, rng, in_ball)
    threshold = k if count_seed else k + 1
    return 1 if infected >= threshold else 0


def local_query_with_mask(g: Graph, v: int, k: int, mask, count_seed: bool = True) -> int:
    """local_query against a fixed full-graph mask (shared-tape form): the
    induced mask on B_k(v) is the restriction of `mask` to internal edges."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    bits = mask_bits(g, mask)
    dist = bfs_distances(g, [v], limit=k)
    in_ball = dist >= 0
    # restrict to edges with both endpoints in the ball
    restricted = bits & in_ball[g.edges[:, 0]] & in_ball[g.edges[:, 1]]
    visited, _ = masked_spread(g, [v], restricted)
    infected = int(np.count_nonzero(visited & in_ball))
    threshold = k if count_seed else k + 1
    return 1 if infected >= threshold else 0


# ---------------------------------------------------------------------------
# the estimator


@dataclass(frozen=True)
class EstimatorReport:
    """Mean of q independent local queries with diagnostics."""

    k: int
    q: int
    n_tilde: float
    halfwidth: float           # 95% binomial CI halfwidth
    master_seed: int
    overlap_fraction: float    # fraction of query pairs with overlapping k-balls
    count_seed: bool = True
    seeding: str = "uniform"   # "uniform" | "degree_biased"
    acceptance_rate: float | None = None
    schedule: tuple = ()       # (k, q, n_tilde) stages when adaptive
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "q": self.q,
            "n_tilde": self.n_tilde,
            "halfwidth": self.halfwidth,
            "master_seed": self.master_seed,
            "overlap_fraction": self.overlap_fraction,
            "count_seed": self.count_seed,
            "seeding": self.seeding,
            "acceptance_rate": self.acceptance_rate,
            "schedule": [list(s) for s in self.schedule],
            "truncated": self.truncated,
        }


def _draw_query_vertex(g: Graph, rng: np.random.Generator, degree_biased: bool,
                       degrees: np.ndarray | None, dmax: int):
    """Seed vertex for one query; rejection sampling against the maximum
    degree when degree-biased. Returns (vertex, proposals)."""
    if not degree_biased:
        return int(rng.integers(g.n)), 1
    proposals = 0
    while True:
        v = int(rng.integers(g.n))
        proposals += 1
        d = int(degrees[v])
        if d == dmax:  # accept surely; skip the wasted uniform
            return v, proposals
        if d > 0 and rng.random() < d / dmax:
            return v, proposals


def _run_estimate(
    g: Graph,
    k: int,
    q: int,
    params: TransmissionParams,
    master_seed: int,
    threads: int,
    count_seed: bool,
    degree_biased: bool,
    label: str,
) -> EstimatorReport:
    if k < 1 or q < 1:
        raise ValueError(f"need k >= 1 and q >= 1, got k={k}, q={q}")
    degrees = g.degrees() if degree_biased else None
    dmax = int(degrees.max()) if degree_biased else 0
    if degree_biased and dmax == 0:
        raise ValueError("degree-biased seeding needs at least one edge")

    def one(i: int):
        rng = rng_for(master_seed, label, i)
        v, proposals = _draw_query_vertex(g, rng, degree_biased, degrees, dmax)
        dist = bfs_distances(g, [v], limit=2 * k)
        in_ball = (dist >= 0) & (dist <= k)
        infected = _percolated_spread_in_ball(g, v, params.p, rng, in_ball)
        success = infected >= (k if count_seed else k + 1)
        return v, success, proposals, dist

    # vertices are the first draw of each substream; recompute cheaply so the
    # overlap diagnostic can run inside the per-query pass
    query_vertices = np.array(
        [_draw_query_vertex(g, rng_for(master_seed, label, i), degree_biased, degrees, dmax)[0]
         for i in range(q)],
        dtype=np.int64,
    )

    def one_with_overlap(i: int):
        v, success, proposals, dist = one(i)
        d = dist[query_vertices]
        overlaps = int(np.count_nonzero((d >= 0) & (d <= 2 * k))) - 1  # drop self
        return success, proposals, overlaps

    results = parallel_map(one_with_overlap, q, threads)
    successes = sum(r[0] for r in results)
    proposals = sum(r[1] for r in results)
    overlap_pairs = sum(r[2] for r in results)
    n_tilde = successes / q
    halfwidth = 1.96 * math.sqrt(max(n_tilde * (1 - n_tilde), 0.0) / q)
    overlap_fraction = overlap_pairs / (q * (q - 1)) if q > 1 else 0.0
    return EstimatorReport(
        k=k, q=q, n_tilde=n_tilde, halfwidth=halfwidth, master_seed=master_seed,
        overlap_fraction=overlap_fraction, count_seed=count_seed,
        seeding="degree_biased" if degree_biased else "uniform",
        acceptance_rate=(q / proposals) if degree_biased else None,
    )


def estimate(
    g: Graph,
    k: int,
    q: int,
    params: TransmissionParams,
    master_seed: int,
    threads: int = 1,
    count_seed: bool = True,
) -> EstimatorReport:
    """Average of q local queries at uniformly random vertices, each on its
    own substream. Also reports the fraction of query pairs whose k-balls
    overlap (balls overlap iff the query vertices are within distance 2k);
    overlapping pairs are measured, not rejected."""
    return _run_estimate(g, k, q, params, master_seed, threads, count_seed,
                         degree_biased=False, label="query")


def estimate_degree_biased(
    g: Graph,
    k: int,
    q: int,
    params: TransmissionParams,
    master_seed: int,
    threads: int = 1,
    count_seed: bool = True,
) -> EstimatorReport:
    """estimate() with seeds drawn proportional to degree via rejection
    sampling against the maximum degree; reports the acceptance rate."""
    return _run_estimate(g, k, q, params, master_seed, threads, count_seed,
                         degree_biased=True, label="query")


def adaptive_estimate(
    g: Graph,
    eps: float,
    params: TransmissionParams,
    master_seed: int,
    threads: int = 1,
    count_seed: bool = True,
    k0: int = 8,
) -> EstimatorReport:
    """Double k from k0 until two successive estimates differ by < eps/2,
    with q = ceil(8/eps^2) queries per stage on fresh substreams.

    If k outgrows the vertex count (the crude diameter proxy) the best
    effort so far is returned with truncated=True.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    q = math.ceil(8 / eps**2)
    schedule = []
    k = k0
    prev = None
    report = None
    stage = 0
    truncated = False
    while True:
        report = _run_estimate(g, k, q, params,
                               substream_seed(master_seed, "adaptive", stage),
                               threads, count_seed, degree_biased=False, label="query")
        schedule.append((k, q, report.n_tilde))
        if prev is not None and abs(report.n_tilde - prev) < eps / 2:
            break
        prev = report.n_tilde
        k *= 2
        stage += 1
        if k > g.n:  # no component can reach k; return best effort, flagged
            truncated = True
            break
    return EstimatorReport(
        k=report.k, q=report.q, n_tilde=report.n_tilde, halfwidth=report.halfwidth,
        master_seed=master_seed, overlap_fraction=report.overlap_fraction,
        count_seed=count_seed, seeding="uniform", acceptance_rate=None,
        schedule=tuple(schedule), truncated=truncated,
    )


# ---------------------------------------------------------------------------
# outbreak-size experiment


@dataclass(frozen=True)
class OutbreakHistogram:
    """Relative outbreak sizes from single uniform seeds, with band masses."""

    seeds: np.ndarray
    final_sizes: np.ndarray
    relative_sizes: np.ndarray
    delta: float
    zeta_ref: float | None
    band_masses: dict
    master_seed: int

    def summary_dict(self) -> dict:
        return {
            "trials": int(len(self.final_sizes)),
            "delta": self.delta,
            "zeta_ref": self.zeta_ref,
            "band_masses": self.band_masses,
            "master_seed": self.master_seed,
            "mean_relative_size": float(self.relative_sizes.mean()),
        }


def band_masses(relative_sizes: np.ndarray, delta: float, zeta_ref: float | None) -> dict:
    """Fractions of mass in [0, delta), [delta, zeta-delta), [zeta-delta, 1].

    Without a reference zeta only the low band is defined.
    """
    n = len(relative_sizes)
    low = float(np.count_nonzero(relative_sizes < delta)) / n
    if zeta_ref is None:
        return {"low": low}
    upper_cut = zeta_ref - delta
    middle = float(np.count_nonzero((relative_sizes >= delta) & (relative_sizes < upper_cut))) / n
    upper = float(np.count_nonzero(relative_sizes >= upper_cut)) / n
    return {"low": low, "middle": middle, "upper": upper}


def outbreak_histogram(
    g: Graph,
    trials: int,
    params: TransmissionParams,
    master_seed: int,
    delta: float = 0.05,
    zeta_ref: float | None = None,
    threads: int = 1,
) -> OutbreakHistogram:
    """Final-size distribution over single uniform-seed SIR runs.

    Band masses use a fixed relative bandwidth `delta` around 0 and around
    the reference zeta (a desk-scale surrogate for asymptotic bands; the
    bandwidth is recorded in the output).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    def one(t: int):
        rng = rng_for(master_seed, "outbreak", t)
        seed_v = int(rng.integers(g.n))
        rec = run_sir(g, [seed_v], params, rng)
        return seed_v, rec.final_size

    rows = parallel_map(one, trials, threads)
    seeds = np.array([r[0] for r in rows], dtype=np.int64)
    sizes = np.array([r[1] for r in rows], dtype=np.int64)
    rel = sizes / g.n
    return OutbreakHistogram(
        seeds=seeds, final_sizes=sizes, relative_sizes=rel, delta=delta,
        zeta_ref=zeta_ref, band_masses=band_masses(rel, delta, zeta_ref),
        master_seed=master_seed,
    )
