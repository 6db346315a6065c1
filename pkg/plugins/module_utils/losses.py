# -*- coding: utf-8 -*-
#
# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""
Training objective of the twin autoencoders.

The total loss is ``L_c + alpha * L_r``: a redundancy reduction term on the
cross-correlation of the two branch embeddings plus the denoising
reconstruction error of both branches.
"""

from __future__ import absolute_import, division, print_function
__metaclass__ = type

import traceback

from ansible_collections.tabular.locl.plugins.module_utils.errors import LossError
from ansible_collections.tabular.locl.plugins.module_utils.tensor_nn import (
    batchnorm_backward,
    batchnorm_forward,
)

try:
    import numpy as np
    HAS_NUMPY = True
    NUMPY_IMPORT_ERROR = None
except ImportError:
    HAS_NUMPY = False
    NUMPY_IMPORT_ERROR = traceback.format_exc()


DEFAULT_LAMBDA = 0.005
DEFAULT_ALPHA = 1.0


class LossReport(object):

    __slots__ = ('l_total', 'l_contrastive', 'l_reconstruction', 'c_diag_mean', 'c_offdiag_mean_sq')

    def __init__(self, l_total, l_contrastive, l_reconstruction, c_diag_mean=0.0, c_offdiag_mean_sq=0.0):
        self.l_total = float(l_total)
        self.l_contrastive = float(l_contrastive)
        self.l_reconstruction = float(l_reconstruction)
        self.c_diag_mean = float(c_diag_mean)
        self.c_offdiag_mean_sq = float(c_offdiag_mean_sq)

    def to_dict(self):
        return dict((name, getattr(self, name)) for name in self.__slots__)


def _valid(width, valid):
    if valid is None:
        return np.ones(width)
    valid = np.asarray(valid, dtype=np.float64)
    if valid.shape != (width,):
        raise LossError('valid-position mask has shape %s, expected (%d,)' % (valid.shape, width))
    return valid


def _residual(x_hat, x, valid, branch):
    x_hat = np.asarray(x_hat, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x_hat.shape != x.shape or x.ndim != 2:
        raise LossError('branch %d reconstruction has shape %s, target has %s' % (branch, x_hat.shape, x.shape))
    return (x_hat - x) * _valid(x.shape[1], valid)


def reconstruction_loss(x_hat1, x1, x_hat2, x2, valid1=None, valid2=None):
    """
    ``1/2 * sum over branches of mean_i ||x_hat_i - x_i||^2``.

    ``valid1``/``valid2`` zero out padded positions.
    """
    total = 0.0
    for branch, (x_hat, x, valid) in enumerate(((x_hat1, x1, valid1), (x_hat2, x2, valid2)), 1):
        r = _residual(x_hat, x, valid, branch)
        total += float(np.sum(r * r)) / r.shape[0]
    return 0.5 * total


def reconstruction_grads(x_hat1, x1, x_hat2, x2, valid1=None, valid2=None):
    """Gradients of :func:`reconstruction_loss` w.r.t. ``x_hat1`` and ``x_hat2``."""
    grads = []
    for branch, (x_hat, x, valid) in enumerate(((x_hat1, x1, valid1), (x_hat2, x2, valid2)), 1):
        r = _residual(x_hat, x, valid, branch)
        grads.append(r / r.shape[0])
    return tuple(grads)


def cross_correlation_forward(z1, z2):
    z1 = np.asarray(z1, dtype=np.float64)
    z2 = np.asarray(z2, dtype=np.float64)
    if z1.shape != z2.shape or z1.ndim != 2:
        raise LossError('embedding batches disagree in shape: %s vs %s' % (z1.shape, z2.shape))
    if z1.shape[0] < 2:
        raise LossError('cross-correlation needs a batch of at least 2, got %d' % z1.shape[0])

    n1, cache1 = batchnorm_forward(z1)
    n2, cache2 = batchnorm_forward(z2)
    n = z1.shape[0]
    return n1.T @ n2 / n, (n1, n2, cache1, cache2)


def cross_correlation_backward(grad_c, cache):
    n1, n2, cache1, cache2 = cache
    n = n1.shape[0]
    grad_n1 = n2 @ grad_c.T / n
    grad_n2 = n1 @ grad_c / n
    return batchnorm_backward(grad_n1, cache1), batchnorm_backward(grad_n2, cache2)


def cross_correlation(z1, z2):
    """``C = norm(z1)^T norm(z2) / n`` with every embedding dimension batch standardized."""
    return cross_correlation_forward(z1, z2)[0]


def _square(c):
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise LossError('cross-correlation matrix must be square, got shape %s' % (c.shape,))
    return c


def barlow_twins_loss(c, lam=DEFAULT_LAMBDA):
    c = _square(c)
    diag = np.diag(c)
    off = c - np.diag(diag)
    return float(np.sum((1.0 - diag) ** 2) + lam * np.sum(off * off))


def barlow_twins_grad(c, lam=DEFAULT_LAMBDA):
    c = _square(c)
    grad = 2.0 * lam * c
    np.fill_diagonal(grad, -2.0 * (1.0 - np.diag(c)))
    return grad


def correlation_summary(c):
    """``(mean of the diagonal, mean square of the off-diagonal)``."""
    c = _square(c)
    d = c.shape[0]
    diag = np.diag(c)
    if d == 1:
        return float(diag[0]), 0.0
    off = c - np.diag(diag)
    return float(diag.mean()), float(np.sum(off * off) / (d * (d - 1)))


def combined_loss(l_contrastive, l_reconstruction, alpha=DEFAULT_ALPHA, c=None):
    if l_reconstruction < 0:
        raise LossError('reconstruction loss cannot be negative, got %r' % l_reconstruction)
    diag_mean, offdiag_mean_sq = correlation_summary(c) if c is not None else (0.0, 0.0)
    return LossReport(l_contrastive + alpha * l_reconstruction, l_contrastive, l_reconstruction,
                      diag_mean, offdiag_mean_sq)


def twin_objective(z1, z2, x_hat1, x1, x_hat2, x2, alpha=DEFAULT_ALPHA, lam=DEFAULT_LAMBDA,
                   valid1=None, valid2=None):
    """
    Evaluate the full objective on one batch.

    Returns ``(LossReport, grads)`` where ``grads`` maps ``z1``, ``z2``,
    ``x_hat1`` and ``x_hat2`` to the gradient of ``l_total``.
    """
    c, cache = cross_correlation_forward(z1, z2)
    l_c = barlow_twins_loss(c, lam)
    l_r = reconstruction_loss(x_hat1, x1, x_hat2, x2, valid1, valid2)
    report = combined_loss(l_c, l_r, alpha, c)

    grad_z1, grad_z2 = cross_correlation_backward(barlow_twins_grad(c, lam), cache)
    grad_x_hat1, grad_x_hat2 = reconstruction_grads(x_hat1, x1, x_hat2, x2, valid1, valid2)
    grads = {
        'z1': grad_z1,
        'z2': grad_z2,
        'x_hat1': alpha * grad_x_hat1,
        'x_hat2': alpha * grad_x_hat2,
    }
    return report, grads
