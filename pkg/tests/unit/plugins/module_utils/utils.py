# -*- coding: utf-8 -*-
#
# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Finite differences and synthetic data shared by the module_utils tests."""

from __future__ import absolute_import, division, print_function
__metaclass__ = type

import numpy as np


def numeric_grad(f, x, h=1e-6):
    """Gradient of the scalar ``f()`` w.r.t. the array ``x``, perturbed in place."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=['multi_index'])
    for _cell in it:
        index = it.multi_index
        saved = x[index]
        x[index] = saved + h
        plus = f()
        x[index] = saved - h
        minus = f()
        x[index] = saved
        grad[index] = (plus - minus) / (2 * h)
    return grad


def relative_error(analytic, numeric):
    scale = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
    return np.linalg.norm(analytic - numeric) / scale


def away_from_zero(values, margin=1e-2):
    """Push entries out of ``(-margin, margin)`` so kinks stay out of reach of ``h``."""
    values = np.array(values, dtype=np.float64)
    close = np.abs(values) < margin
    values[close] += np.where(values[close] < 0, -margin, margin)
    return values


def synthetic_dataset(n=60, m=8, seed=0, n_classes=2):
    """
    Labeled rows whose features come in correlated blocks, shuffled so the
    blocks are not adjacent in column order. Class means differ per block.
    """
    from ansible_collections.tabular.locl.plugins.module_utils.data import TabularDataset

    rng = np.random.default_rng(seed)
    labels = np.arange(n) % n_classes
    blocks = rng.normal(size=(n, 2)) + 1.5 * labels[:, None] * np.array([1.0, -1.0])
    X = np.column_stack([blocks[:, j % 2] + 0.3 * rng.normal(size=n) for j in range(m)])
    X = (X - X.mean(axis=0)) / X.std(axis=0)
    names = ['f%d' % j for j in range(m)]
    return TabularDataset(X, names, labels, classes=[str(c) for c in range(n_classes)])
