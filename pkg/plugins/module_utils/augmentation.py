# -*- coding: utf-8 -*-
#
# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""
Bernoulli masking corruption for the denoising pretext task.

Masked cells are replaced by a value drawn from the same column of the batch
(a per-column row shuffle), or by zero when the ``zero`` corruption is chosen.
"""

from __future__ import absolute_import, division, print_function
__metaclass__ = type

import traceback

from ansible_collections.tabular.locl.plugins.module_utils.errors import AugmentationError

try:
    import numpy as np
    HAS_NUMPY = True
    NUMPY_IMPORT_ERROR = None
except ImportError:
    HAS_NUMPY = False
    NUMPY_IMPORT_ERROR = traceback.format_exc()


MARGINAL = 'marginal'
ZERO = 'zero'
CORRUPTIONS = (MARGINAL, ZERO)


class MaskBatch(object):

    def __init__(self, m_mask, p, seed):
        self.m_mask = m_mask
        self.p = p
        self.seed = seed

    @property
    def shape(self):
        return self.m_mask.shape


def stream_seed(seed, epoch, batch, branch):
    """
    Seed of one (epoch, batch, branch) cell.

    Every batch draws from its own stream, so workers splitting a data
    pipeline reproduce the single-worker sequence.
    """
    return int(np.random.SeedSequence([seed, epoch, batch, branch]).generate_state(1)[0])


def sample_mask(n, width, p, seed):
    if not 0.0 <= p < 1.0:
        raise AugmentationError('mask probability must lie in [0, 1), got %r' % p)
    rng = np.random.default_rng(seed)
    mask = (rng.random((n, width)) < p).astype(np.float64)
    mask.setflags(write=False)
    return MaskBatch(mask, p, seed)


def marginal_values(source, seed):
    """Shuffle every column of ``source`` independently."""
    source = np.asarray(source, dtype=np.float64)
    rng = np.random.default_rng(seed)
    n, width = source.shape
    rows = np.empty((n, width), dtype=np.int64)
    for j in range(width):
        rows[:, j] = rng.permutation(n)
    return source[rows, np.arange(width)]


def corrupt(x, mask, marginal_source=None, seed=0, mode=MARGINAL):
    """
    Apply ``x * (1 - m) + x_bar * m``.

    Unmasked cells are copied from ``x`` bit for bit.
    """
    x = np.asarray(x, dtype=np.float64)
    m = getattr(mask, 'm_mask', mask)
    if m.shape != x.shape:
        raise AugmentationError('mask shape %s does not match batch shape %s' % (m.shape, x.shape))

    if mode == ZERO:
        x_bar = np.zeros_like(x)
    elif mode == MARGINAL:
        source = x if marginal_source is None else np.asarray(marginal_source, dtype=np.float64)
        if source.shape != x.shape:
            raise AugmentationError('marginal source shape %s does not match batch shape %s'
                                    % (source.shape, x.shape))
        x_bar = marginal_values(source, seed)
    else:
        raise AugmentationError('unknown corruption %r, expected one of %s' % (mode, ', '.join(CORRUPTIONS)))

    return np.where(m > 0, x_bar, x)
