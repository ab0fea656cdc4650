import numpy as np
import pytest
from fractions import Fraction

from outbreak_local import (
    OracleCapError,
    build_graph,
    components,
    exact_component_distribution,
    exact_outbreak_distribution,
    exact_zeta_k,
    percolate,
)

from conftest import random_gnp_edges

HALF = Fraction(1, 2)


def k3():
    return build_graph([(0, 1), (0, 2), (1, 2)], 3)


def p3():
    return build_graph([(0, 1), (1, 2)], 3)


class TestComponentDistribution:
    def test_k3_half(self):
        law = exact_component_distribution(k3(), 0, HALF)
        assert law.rational
        assert law.as_dict() == {1: Fraction(1, 4), 2: Fraction(1, 4), 3: HALF}

    def test_p3_middle(self):
        law = exact_component_distribution(p3(), 1, HALF)
        assert law.as_dict() == {1: Fraction(1, 4), 2: HALF, 3: Fraction(1, 4)}

    def test_point_mass_at_full_component(self):
        g = build_graph([(0, 1), (2, 3), (3, 4)], 5)
        law = exact_component_distribution(g, 3, 1.0)
        assert law.as_dict() == {3: 1.0}

    def test_float_mode_sums_to_one(self):
        law = exact_component_distribution(k3(), 0, 0.37)
        assert not law.rational
        assert abs(law.total() - 1.0) < 1e-12

    def test_rational_sums_exactly(self):
        law = exact_component_distribution(k3(), 0, Fraction(3, 7))
        assert law.total() == 1


class TestOutbreakDistribution:
    def test_seeds_cover_everything(self):
        g = build_graph([(0, 1), (2, 3)], 4)
        law = exact_outbreak_distribution(g, [0, 1, 2, 3], HALF)
        assert law.as_dict() == {4: Fraction(1)}

    def test_k3_two_seeds(self):
        # size 2 iff both edges to vertex 2 are closed: 2 of 8 masks
        law = exact_outbreak_distribution(k3(), [0, 1], HALF)
        assert law.as_dict() == {2: Fraction(1, 4), 3: Fraction(3, 4)}

    def test_single_seed_matches_component_law(self):
        rng = np.random.default_rng(2)
        g = build_graph(random_gnp_edges(rng, 6, 0.5), 6)
        a = exact_outbreak_distribution(g, [2], Fraction(2, 5))
        b = exact_component_distribution(g, 2, Fraction(2, 5))
        assert a.as_dict() == b.as_dict()

    def test_empty_seed_rejected(self):
        with pytest.raises(ValueError):
            exact_outbreak_distribution(k3(), [], HALF)

    def test_isomorphism_invariance(self):
        rng = np.random.default_rng(4)
        edges = random_gnp_edges(rng, 7, 0.4)
        g = build_graph(edges, 7)
        perm = rng.permutation(7)
        g2 = build_graph([(perm[u], perm[v]) for u, v in edges], 7)
        for v in range(7):
            a = exact_component_distribution(g, v, Fraction(1, 3))
            b = exact_component_distribution(g2, int(perm[v]), Fraction(1, 3))
            assert a.as_dict() == b.as_dict()

    def test_cap(self):
        g = build_graph([(i, j) for i in range(8) for j in range(i + 1, 8)], 8)
        assert g.m == 28
        with pytest.raises(OracleCapError):
            exact_component_distribution(g, 0, HALF)

    def test_monte_carlo_agreement(self):
        rng = np.random.default_rng(6)
        g = build_graph(random_gnp_edges(rng, 6, 0.5), 6)
        law = exact_component_distribution(g, 0, 0.6)
        counts = {}
        trials = 20000
        for t in range(trials):
            cs = components(g, percolate(g, 0.6, 99, t))
            s = cs.size_of(0)
            counts[s] = counts.get(s, 0) + 1
        emp = {k: v / trials for k, v in counts.items()}
        assert law.tv_distance(emp) < 0.02


class TestZetaK:
    def test_single_edge(self):
        g = build_graph([(0, 1)], 2)
        assert exact_zeta_k(g, 0, 1, Fraction(3, 10)) == Fraction(3, 10)

    def test_p3_from_end(self):
        assert exact_zeta_k(p3(), 0, 2, HALF) == Fraction(1, 4)
        assert exact_zeta_k(p3(), 0, 2, Fraction(7, 10)) == Fraction(49, 100)

    def test_no_far_vertices(self):
        assert exact_zeta_k(k3(), 0, 5, HALF) == Fraction(0)

    def test_unreachable_vertices_never_count(self):
        g = build_graph([(0, 1), (2, 3)], 4)  # 2,3 unreachable from 0
        assert exact_zeta_k(g, 0, 2, HALF) == Fraction(0)

    def test_float_matches_rational(self):
        val_f = exact_zeta_k(p3(), 0, 2, 0.5)
        assert abs(val_f - 0.25) < 1e-12
