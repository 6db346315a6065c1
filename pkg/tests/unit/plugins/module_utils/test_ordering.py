from __future__ import absolute_import, division, print_function

__metaclass__ = type

import heapq
import itertools
import math
import unittest

import numpy as np
import pytest

from ansible_collections.tabular.locl.plugins.module_utils import ordering
from ansible_collections.tabular.locl.plugins.module_utils.errors import OrderingError


def prufer_edges(sequence, m):
    degree = [1] * m
    for node in sequence:
        degree[node] += 1
    leaves = [node for node in range(m) if degree[node] == 1]
    heapq.heapify(leaves)
    edges = []
    for node in sequence:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, node))
        degree[node] -= 1
        if degree[node] == 1:
            heapq.heappush(leaves, node)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return edges


def brute_force_max_weight(weights):
    m = weights.shape[0]
    best = -1.0
    for sequence in itertools.product(range(m), repeat=m - 2):
        total = math.fsum(weights[i, j] for i, j in prufer_edges(sequence, m))
        best = max(best, total)
    return best


def symmetric(rng, m):
    a = rng.uniform(-1, 1, size=(m, m))
    a = (a + a.T) / 2
    np.fill_diagonal(a, 1.0)
    return a


def weights_matrix(pairs, m):
    M = np.eye(m)
    for (i, j), w in pairs.items():
        M[i, j] = M[j, i] = w
    return M


class PearsonTestCase(unittest.TestCase):

    def test_perfect_correlation(self):
        X = np.array([[1.0, 2.0, 4.0], [2.0, 4.0, 3.0], [3.0, 6.0, 2.0], [4.0, 8.0, 1.0]])
        c = ordering.pearson_matrix(X)
        self.assertAlmostEqual(c.M[0, 1], 1.0, places=12)
        self.assertAlmostEqual(c.M[0, 2], -1.0, places=12)
        np.testing.assert_array_equal(np.diag(c.M), np.ones(3))

    def test_matches_two_pass_oracle(self):
        X = np.random.default_rng(1).normal(size=(50, 6))
        oracle = np.eye(6)
        for i in range(6):
            for j in range(6):
                if i == j:
                    continue
                a = X[:, i] - sum(X[:, i]) / 50
                b = X[:, j] - sum(X[:, j]) / 50
                oracle[i, j] = sum(a * b) / math.sqrt(sum(a * a) * sum(b * b))
        np.testing.assert_allclose(ordering.pearson_matrix(X).M, oracle, rtol=0, atol=1e-12)

    def test_constant_feature_correlates_zero(self):
        X = np.column_stack([np.arange(5.0), np.full(5, 3.0), np.arange(5.0) ** 2])
        M = ordering.pearson_matrix(X).M
        self.assertEqual(M[1, 0], 0.0)
        self.assertEqual(M[1, 2], 0.0)
        self.assertEqual(M[1, 1], 1.0)

    def test_symmetric(self):
        c = ordering.pearson_matrix(np.random.default_rng(2).normal(size=(30, 5)))
        np.testing.assert_array_equal(c.M, c.M.T)

    def test_rejects_non_square(self):
        with self.assertRaises(OrderingError):
            ordering.CorrelationMatrix(np.zeros((2, 3)))


class SpanningTreeTestCase(unittest.TestCase):

    def test_two_features(self):
        self.assertEqual(ordering.build_mst(np.array([[1.0, -0.4], [-0.4, 1.0]])), [(0, 1, 0.4)])

    def test_triangle(self):
        M = weights_matrix({(0, 1): 0.9, (1, 2): 0.8, (0, 2): 0.1}, 3)
        edges = ordering.build_mst(M)
        self.assertEqual(sorted((i, j) for i, j, _w in edges), [(0, 1), (1, 2)])
        self.assertAlmostEqual(ordering.tree_weight(edges), 1.7)

    def test_uses_absolute_values(self):
        M = weights_matrix({(0, 1): -0.9, (1, 2): 0.2, (0, 2): 0.3}, 3)
        self.assertEqual(sorted((i, j) for i, j, _w in ordering.build_mst(M)), [(0, 1), (0, 2)])

    def test_ties_resolve_to_lowest_pairs(self):
        M = np.full((4, 4), 0.5)
        np.fill_diagonal(M, 1.0)
        self.assertEqual([(i, j) for i, j, _w in ordering.build_mst(M)], [(0, 1), (0, 2), (0, 3)])

    def test_single_feature(self):
        with self.assertRaises(OrderingError):
            ordering.build_mst(np.ones((1, 1)))

    def test_matches_prufer_enumeration(self):
        rng = np.random.default_rng(2024)
        for m, trials in ((3, 30), (4, 30), (5, 20), (6, 15), (7, 5)):
            for _trial in range(trials):
                M = symmetric(rng, m)
                expected = brute_force_max_weight(np.abs(M))
                self.assertAlmostEqual(ordering.tree_weight(ordering.build_mst(M)), expected, places=12)


class DfsOrderTestCase(unittest.TestCase):

    def test_path_starts_at_the_strongest_endpoint(self):
        M = weights_matrix({(0, 1): 0.9, (1, 2): 0.8, (0, 2): 0.1}, 3)
        result = ordering.dfs_order(ordering.build_mst(M), ordering.CorrelationMatrix(M))
        # node 1 carries both tree edges
        self.assertEqual(result.permutation, (1, 0, 2))

    def test_star_visits_leaves_by_weight(self):
        M = weights_matrix({(0, 1): 0.3, (0, 2): 0.9, (0, 3): 0.5}, 4)
        result = ordering.dfs_order(ordering.build_mst(M), M)
        self.assertEqual(result.permutation, (0, 2, 3, 1))

    def test_two_features(self):
        M = np.array([[1.0, 0.2], [0.2, 1.0]])
        self.assertEqual(ordering.dfs_order(ordering.build_mst(M), M).permutation, (0, 1))

    def test_depth_first(self):
        # root 1 (tree weight 1.6 against 1.5); the subtree of 0 is finished before 2
        M = weights_matrix({(0, 1): 0.9, (1, 2): 0.7, (0, 3): 0.6}, 4)
        result = ordering.dfs_order(ordering.build_mst(M), M)
        self.assertEqual(result.permutation, (1, 0, 3, 2))

    def test_wrong_edge_count(self):
        with self.assertRaisesRegex(OrderingError, 'cannot span'):
            ordering.dfs_order([(0, 1, 0.5)], np.eye(3))

    def test_disconnected(self):
        edges = [(0, 1, 0.5), (0, 1, 0.5), (2, 3, 0.4)]
        with self.assertRaisesRegex(OrderingError, 'disconnected'):
            ordering.dfs_order(edges, np.eye(4))

    def test_is_a_bijection(self):
        rng = np.random.default_rng(3)
        for m in range(2, 12):
            M = symmetric(rng, m)
            result = ordering.dfs_order(ordering.build_mst(M), M)
            self.assertEqual(sorted(result.permutation), list(range(m)))

    def test_beats_identity_on_shuffled_blocks(self):
        rng = np.random.default_rng(4)
        base = rng.normal(size=(200, 3))
        X = np.column_stack([base[:, i % 3] + 0.1 * rng.normal(size=200) for i in (0, 1, 2, 0, 1, 2)])
        c = ordering.pearson_matrix(X)
        mst = ordering.order_features(X)
        self.assertGreater(ordering.adjacency_score(mst, c),
                           ordering.adjacency_score(ordering.alternative_order(6, ordering.ORIGINAL), c))

    def test_beats_the_random_permutation_mean(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            factors = rng.normal(size=(150, 3))
            X = factors @ rng.normal(size=(3, 9)) + 0.5 * rng.normal(size=(150, 9))
            c = ordering.pearson_matrix(X)
            baseline = np.mean([ordering.adjacency_score(ordering.alternative_order(9, ordering.RANDOM, seed=s), c)
                                for s in range(100)])
            self.assertGreaterEqual(ordering.adjacency_score(ordering.order_features(X), c), baseline, seed)


class AlternativeOrderTestCase(unittest.TestCase):

    def test_original(self):
        self.assertEqual(ordering.alternative_order(4, ordering.ORIGINAL).permutation, (0, 1, 2, 3))

    def test_interleaved(self):
        self.assertEqual(ordering.alternative_order(5, ordering.INTERLEAVED).permutation, (0, 2, 4, 1, 3))

    def test_random_is_seeded(self):
        first = ordering.alternative_order(10, ordering.RANDOM, seed=3)
        second = ordering.alternative_order(10, ordering.RANDOM, seed=3)
        self.assertEqual(first.permutation, second.permutation)
        self.assertEqual(sorted(first.permutation), list(range(10)))

    def test_mst_is_not_an_alternative(self):
        with self.assertRaises(OrderingError):
            ordering.alternative_order(4, ordering.MST)

    def test_order_features_dispatch(self):
        X = np.random.default_rng(0).normal(size=(20, 5))
        self.assertEqual(ordering.order_features(X, ordering.INTERLEAVED).permutation, (0, 2, 4, 1, 3))
        self.assertEqual(ordering.order_features(X).variant, ordering.MST)

    def test_numeric_feature_order_does_not_matter(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(100, 6))
        X[:, 3] += X[:, 0]
        X[:, 5] -= 0.5 * X[:, 3]
        p = rng.permutation(6)
        original = ordering.order_features(X)
        permuted = ordering.order_features(X[:, p])
        self.assertEqual([int(p[i]) for i in permuted.permutation], list(original.permutation))


@pytest.mark.parametrize('m, overlap, subset1, subset2', [
    (7, 0.0, (0, 1, 2, 3), (4, 5, 6)),
    (10, 0.1, (0, 1, 2, 3, 4, 5), (4, 5, 6, 7, 8, 9)),
    (2, 0.0, (0,), (1,)),
])
def test_split_features(m, overlap, subset1, subset2):
    split = ordering.split_features(ordering.alternative_order(m, ordering.ORIGINAL), overlap)
    assert split.subset1 == subset1
    assert split.subset2 == subset2


def test_split_rejects_full_overlap():
    with pytest.raises(OrderingError):
        ordering.split_features(ordering.alternative_order(4, ordering.ORIGINAL), 0.5)


def test_split_follows_permutation():
    split = ordering.split_features(ordering.FeatureOrdering((3, 1, 0, 2), variant=ordering.RANDOM))
    assert split.subset1 == (3, 1)
    assert split.subset2 == (0, 2)


def test_ordering_round_trip():
    M = weights_matrix({(0, 1): 0.9, (1, 2): 0.8, (0, 2): 0.1}, 3)
    result = ordering.dfs_order(ordering.build_mst(M), M)
    again = ordering.FeatureOrdering.from_dict(result.to_dict())
    assert again.permutation == result.permutation
    assert again.mst_edges == result.mst_edges
