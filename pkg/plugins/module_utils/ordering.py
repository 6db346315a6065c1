# -*- coding: utf-8 -*-
#
# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""
Correlation driven feature ordering and the twin feature split.

The features are nodes of a complete graph weighted by absolute Pearson
correlation. A maximum spanning tree of that graph is walked depth first,
strongest edges first, so strongly correlated features end up next to each
other. The resulting permutation is cut into two subsets, one per branch.
"""

from __future__ import absolute_import, division, print_function
__metaclass__ = type

import math
import traceback

from ansible_collections.tabular.locl.plugins.module_utils.errors import OrderingError

try:
    import numpy as np
    HAS_NUMPY = True
    NUMPY_IMPORT_ERROR = None
except ImportError:
    HAS_NUMPY = False
    NUMPY_IMPORT_ERROR = traceback.format_exc()


MST = 'mst'
RANDOM = 'random'
ORIGINAL = 'original'
INTERLEAVED = 'interleaved'
VARIANTS = (MST, RANDOM, ORIGINAL, INTERLEAVED)


class CorrelationMatrix(object):
    """Symmetric m x m Pearson matrix with an exact unit diagonal."""

    def __init__(self, M):
        M = np.array(M, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise OrderingError('correlation matrix must be square, got shape %s' % (M.shape,))
        if not np.all(np.isfinite(M)):
            raise OrderingError('correlation matrix has non-finite entries')
        if not np.array_equal(M, M.T):
            raise OrderingError('correlation matrix is not symmetric')
        M.setflags(write=False)
        self.M = M

    @property
    def m(self):
        return self.M.shape[0]


class FeatureOrdering(object):
    """
    :permutation: tuple of feature indices, a bijection on 0..m-1
    :mst_edges:   tuple of (i, j, weight) with i < j, empty for non-MST variants
    :variant:     one of mst, random, original, interleaved
    """

    def __init__(self, permutation, mst_edges=(), variant=MST):
        permutation = tuple(int(p) for p in permutation)
        if sorted(permutation) != list(range(len(permutation))):
            raise OrderingError('permutation is not a bijection on 0..%d' % (len(permutation) - 1))
        if variant not in VARIANTS:
            raise OrderingError('unknown ordering variant %r' % variant)
        self.permutation = permutation
        self.mst_edges = tuple((int(i), int(j), float(w)) for i, j, w in mst_edges)
        self.variant = variant

    @property
    def m(self):
        return len(self.permutation)

    def to_dict(self):
        return {
            'variant': self.variant,
            'permutation': list(self.permutation),
            'mst_edges': [list(e) for e in self.mst_edges],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data['permutation'], data.get('mst_edges', ()), data['variant'])


class SplitPlan(object):
    """The two feature-index subsets fed to the twin branches."""

    def __init__(self, subset1, subset2, overlap_fraction=0.0):
        self.subset1 = tuple(int(i) for i in subset1)
        self.subset2 = tuple(int(i) for i in subset2)
        self.overlap_fraction = float(overlap_fraction)

    def to_dict(self):
        return {
            'subset1': list(self.subset1),
            'subset2': list(self.subset2),
            'overlap_fraction': self.overlap_fraction,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data['subset1'], data['subset2'], data.get('overlap_fraction', 0.0))


def pearson_matrix(dataset_or_X):
    """
    Pearson correlation with population moments, computed in two passes.

    A feature that is constant on the given rows correlates 0 with every
    other feature.
    """
    X = getattr(dataset_or_X, 'X', dataset_or_X)
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    centered = X - X.mean(axis=0)
    cov = np.einsum('ni,nj->ij', centered, centered) / n
    std = np.sqrt(np.diag(cov))
    denom = np.outer(std, std)
    with np.errstate(divide='ignore', invalid='ignore'):
        M = np.where(denom > 0, cov / denom, 0.0)
    M = np.clip(M, -1.0, 1.0)
    M = (M + M.T) / 2
    np.fill_diagonal(M, 1.0)
    return CorrelationMatrix(M)


class _DisjointSet(object):

    def __init__(self, size):
        self.parent = list(range(size))

    def find(self, node):
        root = node
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[node] != root:
            self.parent[node], node = root, self.parent[node]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def build_mst(c):
    """
    Maximum spanning tree over ``|M|`` (Kruskal).

    Equal weights are taken in ascending ``(i, j)`` order, which makes the
    tree unique for a given matrix.
    """
    M = getattr(c, 'M', c)
    m = M.shape[0]
    if m < 2:
        raise OrderingError('a spanning tree needs at least 2 features, got %d' % m)

    weights = np.abs(M)
    candidates = [(i, j) for i in range(m) for j in range(i + 1, m)]
    candidates.sort(key=lambda e: (-weights[e[0], e[1]], e[0], e[1]))

    forest = _DisjointSet(m)
    edges = []
    for i, j in candidates:
        if forest.union(i, j):
            edges.append((i, j, float(weights[i, j])))
            if len(edges) == m - 1:
                break
    return edges


def tree_weight(edges):
    return math.fsum(w for _i, _j, w in edges)


def _adjacency(edges, m):
    adjacency = dict((node, []) for node in range(m))
    for i, j, w in edges:
        adjacency[i].append((w, j))
        adjacency[j].append((w, i))
    return adjacency


def _root(edges, adjacency):
    # endpoint of the heaviest edge (lowest pair on ties) with the larger
    # incident tree weight, lower index on ties
    i, j, _w = min(edges, key=lambda e: (-e[2], min(e[0], e[1]), max(e[0], e[1])))
    strength_i = math.fsum(w for w, _n in adjacency[i])
    strength_j = math.fsum(w for w, _n in adjacency[j])
    if strength_i > strength_j:
        return i
    if strength_j > strength_i:
        return j
    return min(i, j)


def dfs_order(edges, c):
    """
    Depth-first visit order of the tree, children taken by descending edge
    weight (lower index on ties).
    """
    m = getattr(c, 'm', None) or np.asarray(c).shape[0]
    if len(edges) != m - 1:
        raise OrderingError('%d edges cannot span %d features' % (len(edges), m))

    adjacency = _adjacency(edges, m)
    root = _root(edges, adjacency)

    order = []
    seen = set()
    stack = [root]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        order.append(node)
        children = sorted(((w, n) for w, n in adjacency[node] if n not in seen),
                          key=lambda child: (-child[0], child[1]))
        stack.extend(n for _w, n in reversed(children))

    if len(order) != m:
        raise OrderingError('edge list is disconnected: reached %d of %d features' % (len(order), m))

    return FeatureOrdering(order, edges, MST)


def alternative_order(m, variant, seed=0):
    """Orderings for the ablation cells: identity, seeded random, evens-then-odds."""
    if m < 2:
        raise OrderingError('ordering needs at least 2 features, got %d' % m)
    if variant == ORIGINAL:
        permutation = range(m)
    elif variant == RANDOM:
        permutation = np.random.default_rng(seed).permutation(m)
    elif variant == INTERLEAVED:
        permutation = list(range(0, m, 2)) + list(range(1, m, 2))
    else:
        raise OrderingError('alternative ordering must be random, original or interleaved, got %r' % variant)
    return FeatureOrdering(permutation, (), variant)


def order_features(dataset_or_X, variant=MST, seed=0):
    """Compute the ordering for ``variant`` from the rows given."""
    X = getattr(dataset_or_X, 'X', dataset_or_X)
    m = np.asarray(X).shape[1]
    if variant != MST:
        return alternative_order(m, variant, seed)
    c = pearson_matrix(X)
    return dfs_order(build_mst(c), c)


def split_features(o, overlap_fraction=0.0):
    """
    Cut the permutation into two subsets.

    ``subset1`` is the first ``ceil(m/2) + floor(overlap * m)`` permuted
    features and ``subset2`` the last ``floor(m/2) + floor(overlap * m)``.
    """
    m = o.m
    if m < 2:
        raise OrderingError('a split needs at least 2 features, got %d' % m)
    if not 0.0 <= overlap_fraction <= 0.5:
        raise OrderingError('overlap_fraction must lie in [0, 0.5], got %r' % overlap_fraction)

    shared = int(math.floor(overlap_fraction * m + 1e-9))
    size1 = (m + 1) // 2 + shared
    size2 = m // 2 + shared
    if size1 >= m or size2 >= m:
        raise OrderingError('overlap_fraction %r makes a subset cover all %d features' % (overlap_fraction, m))

    return SplitPlan(o.permutation[:size1], o.permutation[m - size2:], overlap_fraction)


def adjacency_score(o, c):
    """Mean ``|M|`` between consecutive features of the permutation."""
    M = np.abs(getattr(c, 'M', c))
    p = np.asarray(o.permutation)
    return float(np.mean(M[p[:-1], p[1:]]))
