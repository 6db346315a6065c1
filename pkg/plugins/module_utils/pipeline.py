# -*- coding: utf-8 -*-
#
# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""
Pretraining of the twin autoencoders, early stopping, checkpoints and
embedding extraction.
"""

from __future__ import absolute_import, division, print_function
__metaclass__ = type

import hashlib
import math
import time
import traceback

from collections import OrderedDict

from ansible_collections.tabular.locl.plugins.module_utils import augmentation, container, data, ordering
from ansible_collections.tabular.locl.plugins.module_utils.errors import ConfigError, DataError, PretrainError
from ansible_collections.tabular.locl.plugins.module_utils.losses import twin_objective
from ansible_collections.tabular.locl.plugins.module_utils.tensor_nn import (
    OptimizerState,
    Sequential,
    conv_autoencoder,
    dense_autoencoder,
    padded_width,
    rmsprop_step,
)

try:
    import numpy as np
    HAS_NUMPY = True
    NUMPY_IMPORT_ERROR = None
except ImportError:
    HAS_NUMPY = False
    NUMPY_IMPORT_ERROR = traceback.format_exc()


CONV = 'conv'
DENSE = 'dense'
ENCODER_KINDS = (CONV, DENSE)

# name -> (type, default); option names of every module follow these keys
FIELDS = OrderedDict([
    ('batch_size', (int, 128)),
    ('latent_dim', (int, 64)),
    ('alpha', (float, 1.0)),
    ('lambda', (float, 0.005)),
    ('mask_p', (float, 0.3)),
    ('learning_rate', (float, 0.001)),
    ('max_epochs', (int, 200)),
    ('patience', (int, 10)),
    ('min_delta', (float, 1e-4)),
    ('kernel_size', (int, 3)),
    ('channel_plan', (list, (16, 32, 64))),
    ('overlap_fraction', (float, 0.0)),
    ('ordering_variant', (str, ordering.MST)),
    ('encoder_kind', (str, CONV)),
    ('corruption', (str, augmentation.MARGINAL)),
    ('validation_fraction', (float, 0.1)),
    ('rmsprop_decay', (float, 0.9)),
    ('rmsprop_epsilon', (float, 1e-8)),
    ('seed', (int, 0)),
])

# random streams besides the two training branches (see augmentation.stream_seed)
_SHUFFLE_STREAM = 8
_VALIDATION_BRANCH = 2

EMBED_CHUNK = 1024


def _attr(name):
    return 'lambda_' if name == 'lambda' else name


class TrainConfig(object):
    """Every knob of one pretraining run. ``lambda`` is stored as ``lambda_``."""

    def __init__(self, **values):
        unknown = sorted(set(values) - set(FIELDS))
        if unknown:
            raise ConfigError('unknown training option(s): %s' % ', '.join(unknown))
        for name, (kind, default) in FIELDS.items():
            value = values.get(name)
            if value is None:
                value = default
            try:
                value = tuple(int(v) for v in value) if kind is list else kind(value)
            except (TypeError, ValueError):
                raise ConfigError('option %s: cannot interpret %r as %s' % (name, value, kind.__name__))
            setattr(self, _attr(name), value)
        self.validate()

    def validate(self):
        for name in ('batch_size', 'latent_dim', 'max_epochs', 'patience', 'kernel_size'):
            if getattr(self, name) < 1:
                raise ConfigError('option %s must be positive, got %d' % (name, getattr(self, name)))
        if self.batch_size < 2:
            raise ConfigError('option batch_size must be at least 2, got %d' % self.batch_size)
        if self.kernel_size % 2 != 1:
            raise ConfigError('option kernel_size must be odd, got %d' % self.kernel_size)
        if len(self.channel_plan) != 3 or min(self.channel_plan) < 1:
            raise ConfigError('option channel_plan needs 3 positive counts, got %s' % list(self.channel_plan))
        if not 0.0 <= self.mask_p < 1.0:
            raise ConfigError('option mask_p must lie in [0, 1), got %r' % self.mask_p)
        if not 0.0 <= self.overlap_fraction <= 0.5:
            raise ConfigError('option overlap_fraction must lie in [0, 0.5], got %r' % self.overlap_fraction)
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError('option validation_fraction must lie in (0, 1), got %r' % self.validation_fraction)
        if not 0.0 <= self.rmsprop_decay < 1.0:
            raise ConfigError('option rmsprop_decay must lie in [0, 1), got %r' % self.rmsprop_decay)
        for name in ('alpha', 'lambda', 'min_delta'):
            if getattr(self, _attr(name)) < 0:
                raise ConfigError('option %s cannot be negative' % name)
        for name in ('learning_rate', 'rmsprop_epsilon'):
            if getattr(self, name) <= 0:
                raise ConfigError('option %s must be positive' % name)
        if self.seed < 0:
            raise ConfigError('option seed cannot be negative, got %d' % self.seed)
        choices = (
            ('ordering_variant', ordering.VARIANTS),
            ('encoder_kind', ENCODER_KINDS),
            ('corruption', augmentation.CORRUPTIONS),
        )
        for name, allowed in choices:
            if getattr(self, name) not in allowed:
                raise ConfigError('option %s must be one of %s, got %r'
                                  % (name, ', '.join(allowed), getattr(self, name)))

    def to_dict(self):
        values = OrderedDict()
        for name, (kind, _default) in FIELDS.items():
            value = getattr(self, _attr(name))
            values[name] = list(value) if kind is list else value
        return values

    @classmethod
    def from_dict(cls, values):
        return cls(**dict(values))

    def replace(self, **changes):
        values = self.to_dict()
        values.update(changes)
        return TrainConfig(**values)

    def fingerprint(self):
        return hashlib.sha256(container.canonical_json(self.to_dict()).encode('utf-8')).hexdigest()

    def __eq__(self, other):
        return isinstance(other, TrainConfig) and self.to_dict() == other.to_dict()

    def __ne__(self, other):
        return not self == other


def _pad(x, width):
    return np.pad(x, ((0, 0), (0, width - x.shape[1])))


class TwinModel(object):
    """
    Two encoder/decoder branches, one per feature subset of ``split``.

    Branch inputs are the subset columns right-padded with zeros to the
    width the architecture needs.
    """

    def __init__(self, config, feature_names, ordering_, split, branches, dataset_fingerprint=None):
        self.config = config
        self.feature_names = tuple(feature_names)
        self.ordering = ordering_
        self.split = split
        self.branches = [tuple(b) for b in branches]
        self.dataset_fingerprint = dataset_fingerprint

        self.subsets = (np.asarray(split.subset1, dtype=np.int64), np.asarray(split.subset2, dtype=np.int64))
        self.widths = tuple(padded_width(s.size, config.encoder_kind) for s in self.subsets)
        self.valid = tuple((np.arange(w) < s.size).astype(np.float64) for w, s in zip(self.widths, self.subsets))

    @classmethod
    def build(cls, config, feature_names, ordering_, split, dataset_fingerprint=None):
        branches = []
        for branch, subset in enumerate((split.subset1, split.subset2)):
            rng = np.random.default_rng(np.random.SeedSequence([config.seed, branch]))
            if config.encoder_kind == CONV:
                branches.append(conv_autoencoder(len(subset), config.latent_dim, config.kernel_size,
                                                 config.channel_plan, rng))
            else:
                branches.append(dense_autoencoder(len(subset), config.latent_dim, config.channel_plan, rng))
        return cls(config, feature_names, ordering_, split, branches, dataset_fingerprint)

    def named_parameters(self):
        named = []
        for branch, (encoder, decoder) in enumerate(self.branches, 1):
            for part, net in (('encoder', encoder), ('decoder', decoder)):
                for index, layer in enumerate(net.layers):
                    for pname, param in zip(('weight', 'bias'), layer.params):
                        named.append(('%s%d.%d.%s' % (part, branch, index, pname), param))
        return named

    def zero_grad(self):
        for _name, param in self.named_parameters():
            param.zero_grad()

    def snapshot(self):
        return [param.values.copy() for _name, param in self.named_parameters()]

    def restore(self, values):
        for (_name, param), value in zip(self.named_parameters(), values):
            param.values = value.copy()

    def subset_values(self, X):
        """Unpadded branch inputs ``(X[:, subset1], X[:, subset2])``."""
        X = np.asarray(X, dtype=np.float64)
        return tuple(X[:, s] for s in self.subsets)

    def encode(self, X):
        z = []
        for (encoder, _decoder), values, width in zip(self.branches, self.subset_values(X), self.widths):
            z.append(encoder(_pad(values, width)))
        return tuple(z)

    def loss_and_backward(self, clean, corrupted, backward=True):
        """
        Forward both branches on corrupted inputs and score them against the
        clean ones. With ``backward`` the parameter gradients are accumulated.
        Returns the LossReport.
        """
        forward = []
        for (encoder, decoder), x, width in zip(self.branches, corrupted, self.widths):
            z, enc_cache = encoder.forward(_pad(x, width))
            x_hat, dec_cache = decoder.forward(z)
            forward.append((z, enc_cache, x_hat, dec_cache))

        (z1, _c1, x_hat1, _d1), (z2, _c2, x_hat2, _d2) = forward
        targets = [_pad(x, width) for x, width in zip(clean, self.widths)]
        report, grads = twin_objective(z1, z2, x_hat1, targets[0], x_hat2, targets[1],
                                       self.config.alpha, self.config.lambda_, self.valid[0], self.valid[1])
        if not backward:
            return report

        for branch, (net, cached) in enumerate(zip(self.branches, forward), 1):
            encoder, decoder = net
            _z, enc_cache, _x_hat, dec_cache = cached
            grad_z = grads['z%d' % branch] + decoder.backward(grads['x_hat%d' % branch], dec_cache)
            encoder.backward(grad_z, enc_cache)
        return report

    def evaluate_loss(self, clean, corrupted):
        return self.loss_and_backward(clean, corrupted, backward=False)


class EmbeddingMatrix(object):

    def __init__(self, Z, row_ids):
        self.Z = np.asarray(Z, dtype=np.float64)
        self.row_ids = np.asarray(row_ids, dtype=np.int64)
        if self.Z.shape[0] != self.row_ids.shape[0]:
            raise DataError('%d embedding rows for %d row ids' % (self.Z.shape[0], self.row_ids.shape[0]))


class EarlyStopping(object):
    """
    Patience counter on the validation loss.

    The patience clock resets only on an improvement of at least
    ``min_delta``; the kept checkpoint is always the lowest loss seen.
    """

    def __init__(self, patience=10, min_delta=1e-4):
        self.patience = patience
        self.min_delta = min_delta
        self.best_loss = float('inf')
        self.best_epoch = None
        self.best_state = None
        self.reference = float('inf')
        self.wait = 0

    def update(self, epoch, loss, state_fn):
        if loss < self.best_loss:
            self.best_loss = loss
            self.best_epoch = epoch
            self.best_state = state_fn()
        if loss < self.reference - self.min_delta:
            self.reference = loss
            self.wait = 0
        else:
            self.wait += 1
        return self.should_stop

    @property
    def should_stop(self):
        return self.wait >= self.patience


class PretrainResult(object):

    def __init__(self, model, history, best_epoch, stopped_early):
        self.model = model
        self.history = history
        self.best_epoch = best_epoch
        self.stopped_early = stopped_early


def corrupt_branch(values, config, epoch, batch, stream):
    """Corrupt one branch batch with the streams reserved for ``stream``."""
    mask = augmentation.sample_mask(values.shape[0], values.shape[1], config.mask_p,
                                    augmentation.stream_seed(config.seed, epoch, batch, 2 * stream))
    return augmentation.corrupt(values, mask, seed=augmentation.stream_seed(config.seed, epoch, batch, 2 * stream + 1),
                                mode=config.corruption)


def _chunks(rows, size):
    chunks = [rows[i:i + size] for i in range(0, rows.size, size)]
    if len(chunks) > 1 and chunks[-1].size < 2:
        chunks[-2] = np.concatenate(chunks[-2:])
        chunks.pop()
    return chunks


def validation_loss(model, X, rows):
    """Mean total loss over the held-out rows, corrupted with fixed streams."""
    totals = []
    for index, chunk in enumerate(_chunks(rows, model.config.batch_size)):
        clean = model.subset_values(X[chunk])
        corrupted = [corrupt_branch(values, model.config, 0, index, _VALIDATION_BRANCH + branch)
                     for branch, values in enumerate(clean)]
        totals.append(model.evaluate_loss(clean, corrupted).l_total)
    return math.fsum(totals) / len(totals)


def pretrain(dataset, config, rows=None, on_event=None, feature_order=None, split=None):
    """
    Train a :class:`TwinModel` on ``rows`` of ``dataset`` (all rows by default).

    The feature ordering is computed on those rows unless ``feature_order``
    (and optionally its ``split``) is given, as read back from a saved
    ordering. A ``validation_fraction`` share of the rows is held out to drive
    early stopping; the best checkpoint by validation loss is restored before
    returning.
    """
    emit = on_event or (lambda event, data: None)
    rows = np.arange(dataset.n_rows) if rows is None else np.asarray(rows, dtype=np.int64)
    if rows.size < 2 * config.batch_size:
        raise PretrainError('pretraining needs at least %d unlabeled rows (2 x batch_size), got %d'
                            % (2 * config.batch_size, rows.size))

    X = dataset.X
    if feature_order is None:
        feature_order = ordering.order_features(X[rows], config.ordering_variant, config.seed)
    elif feature_order.m != dataset.n_features:
        raise PretrainError('ordering covers %d features, the dataset has %d' % (feature_order.m, dataset.n_features))
    if split is None:
        split = ordering.split_features(feature_order, config.overlap_fraction)
    elif sorted(set(split.subset1) | set(split.subset2)) != list(range(dataset.n_features)):
        raise PretrainError('feature split does not cover the %d dataset features' % dataset.n_features)
    model = TwinModel.build(config, dataset.feature_names, feature_order, split, data.dataset_fingerprint(dataset))

    holdout = np.random.default_rng(np.random.SeedSequence([config.seed, _VALIDATION_BRANCH])).permutation(rows)
    n_val = max(2, int(round(config.validation_fraction * rows.size)))
    val_rows, train_rows = np.sort(holdout[:n_val]), np.sort(holdout[n_val:])
    n_batches = train_rows.size // config.batch_size

    state = OptimizerState(config.learning_rate, config.rmsprop_decay, config.rmsprop_epsilon)
    stopper = EarlyStopping(config.patience, config.min_delta)
    history = []
    started = time.time()
    emit('pretrain_start', {
        'rows': int(rows.size),
        'train_rows': int(train_rows.size),
        'validation_rows': int(val_rows.size),
        'permutation': list(feature_order.permutation),
        'config': config.to_dict(),
    })

    for epoch in range(config.max_epochs):
        shuffle_seed = augmentation.stream_seed(config.seed, epoch, 0, _SHUFFLE_STREAM)
        order = np.random.default_rng(shuffle_seed).permutation(train_rows)
        reports = []
        for batch in range(n_batches):
            batch_rows = order[batch * config.batch_size:(batch + 1) * config.batch_size]
            clean = model.subset_values(X[batch_rows])
            corrupted = [corrupt_branch(values, config, epoch, batch, branch) for branch, values in enumerate(clean)]

            model.zero_grad()
            report = model.loss_and_backward(clean, corrupted)
            if not math.isfinite(report.l_total):
                raise PretrainError('non-finite loss at epoch %d batch %d' % (epoch, batch))
            params = model.named_parameters()
            rmsprop_step(params, dict((name, p.grad) for name, p in params), state)
            reports.append(report)

        val = validation_loss(model, X, val_rows)
        if not math.isfinite(val):
            raise PretrainError('non-finite validation loss at epoch %d' % epoch)

        record = OrderedDict([('epoch', epoch)])
        for key in ('l_total', 'l_contrastive', 'l_reconstruction', 'c_diag_mean', 'c_offdiag_mean_sq'):
            record[key] = math.fsum(getattr(r, key) for r in reports) / len(reports)
        record['val_loss'] = val
        stop = stopper.update(epoch, val, model.snapshot)
        record['early_stop'] = stop
        record['wall_time'] = time.time() - started
        history.append(record)
        emit('epoch', dict(record))
        if stop:
            break

    model.restore(stopper.best_state)
    emit('pretrain_end', {
        'best_epoch': stopper.best_epoch,
        'best_val_loss': stopper.best_loss,
        'epochs': len(history),
        'stopped_early': stopper.should_stop,
    })
    return PretrainResult(model, history, stopper.best_epoch, stopper.should_stop)


def embed(model, dataset, rows=None, chunk_size=EMBED_CHUNK):
    """Uncorrupted twin embeddings ``[z1 | z2]`` of ``rows`` (all rows by default)."""
    if tuple(dataset.feature_names) != model.feature_names:
        missing = sorted(set(model.feature_names) - set(dataset.feature_names))
        extra = sorted(set(dataset.feature_names) - set(model.feature_names))
        raise DataError('dataset features do not match the trained ordering (missing: %s; unexpected: %s)'
                        % (', '.join(missing) or 'none', ', '.join(extra) or 'none'))

    rows = np.arange(dataset.n_rows) if rows is None else np.asarray(rows, dtype=np.int64)
    parts = []
    for start in range(0, rows.size, chunk_size):
        z1, z2 = model.encode(dataset.X[rows[start:start + chunk_size]])
        parts.append(np.hstack([z1, z2]))
    width = 2 * model.config.latent_dim
    Z = np.vstack(parts) if parts else np.zeros((0, width))
    return EmbeddingMatrix(Z, rows)


# ==============================================================
#   CHECKPOINTS
# ==============================================================

def save_checkpoint(model, extra=None):
    layers = OrderedDict()
    for branch, (encoder, decoder) in enumerate(model.branches, 1):
        layers['encoder%d' % branch] = encoder.manifest()
        layers['decoder%d' % branch] = decoder.manifest()
    manifest = {
        'config': model.config.to_dict(),
        'feature_names': list(model.feature_names),
        'ordering': model.ordering.to_dict(),
        'split': model.split.to_dict(),
        'layers': layers,
        'dataset_fingerprint': model.dataset_fingerprint,
        'extra': extra or {},
    }
    arrays = [(name, param.values) for name, param in model.named_parameters()]
    return container.pack('checkpoint', manifest, arrays)


def load_checkpoint(data):
    """Rebuild a :class:`TwinModel`; weight shapes are checked against the layer manifest."""
    manifest, arrays = container.unpack(data, kind='checkpoint')
    config = TrainConfig.from_dict(manifest['config'])
    branches = []
    for branch in (1, 2):
        branches.append((Sequential.from_manifest(manifest['layers']['encoder%d' % branch]),
                         Sequential.from_manifest(manifest['layers']['decoder%d' % branch])))
    model = TwinModel(config, manifest['feature_names'],
                      ordering.FeatureOrdering.from_dict(manifest['ordering']),
                      ordering.SplitPlan.from_dict(manifest['split']),
                      branches, manifest.get('dataset_fingerprint'))

    named = model.named_parameters()
    if [name for name, _p in named] != list(arrays):
        raise PretrainError('checkpoint arrays do not match its layer manifest')
    for name, param in named:
        if arrays[name].shape != param.shape:
            raise PretrainError('checkpoint array %s has shape %s, manifest implies %s'
                                % (name, arrays[name].shape, param.shape))
        param.values = arrays[name].copy()
    return model, manifest.get('extra', {})


def save_embeddings(embedding, manifest=None):
    manifest = dict(manifest or {}, width=int(embedding.Z.shape[1]))
    return container.pack('embedding', manifest, [('Z', embedding.Z), ('row_ids', embedding.row_ids)])


def load_embeddings(payload):
    manifest, arrays = container.unpack(payload, kind='embedding')
    return EmbeddingMatrix(arrays['Z'], arrays['row_ids'].astype(np.int64)), manifest
