# -*- coding: utf-8 -*-
#
# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""
Linear probe on frozen embeddings and the cross-validated evaluation runs
built on it: the k-fold protocol, the ablation table and the alpha/kernel sweep.
"""

from __future__ import absolute_import, division, print_function
__metaclass__ = type

import math
import traceback

from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor

from ansible_collections.tabular.locl.plugins.module_utils import data, ordering
from ansible_collections.tabular.locl.plugins.module_utils.errors import ProbeError
from ansible_collections.tabular.locl.plugins.module_utils.pipeline import DENSE, embed, pretrain

try:
    import numpy as np
    HAS_NUMPY = True
    NUMPY_IMPORT_ERROR = None
except ImportError:
    HAS_NUMPY = False
    NUMPY_IMPORT_ERROR = traceback.format_exc()


DEFAULT_REG = 1e-3
REG_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)
REG_FOLDS = 3
MAX_ITERATIONS = 5000
GRADIENT_TOLERANCE = 1e-6

ALPHA_GRID = (0.1, 0.5, 1.0, 2.0, 5.0)
KERNEL_GRID = (3, 5, 7)

ABLATION_CELLS = (
    ('LoCL', {}),
    ('LoCL - Dense layer', {'encoder_kind': DENSE}),
    ('LoCL - Random ordering', {'ordering_variant': ordering.RANDOM}),
    ('LoCL - Original order', {'ordering_variant': ordering.ORIGINAL}),
    ('LoCL - Interleaved order', {'ordering_variant': ordering.INTERLEAVED}),
)

TABLE_HEADER = ('Model Variants', 'Accuracy', 'Std')


# ==============================================================
#   LINEAR PROBE
# ==============================================================

class ProbeModel(object):
    """
    Multinomial logistic regression on standardized embeddings.

    :W:      ndarray K x D
    :b:      ndarray K
    :mean:   ndarray D, feature means of the training rows
    :scale:  ndarray D, feature standard deviations (1 for constant features)
    """

    def __init__(self, W, b, classes, mean, scale, reg=DEFAULT_REG, iterations=0, grad_norm=0.0):
        self.W = np.asarray(W, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)
        if self.W.shape[0] < 2:
            raise ProbeError('a probe needs at least 2 classes, got %d' % self.W.shape[0])
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b))):
            raise ProbeError('probe parameters are not finite')
        self.classes = tuple(classes)
        self.mean = np.asarray(mean, dtype=np.float64)
        self.scale = np.asarray(scale, dtype=np.float64)
        self.reg = reg
        self.iterations = iterations
        self.grad_norm = grad_norm

    def standardize(self, Z):
        Z = np.asarray(Z, dtype=np.float64)
        if Z.ndim != 2 or Z.shape[1] != self.W.shape[1]:
            raise ProbeError('probe expects %d embedding columns, got shape %s' % (self.W.shape[1], Z.shape))
        return (Z - self.mean) / self.scale

    def logits(self, Z):
        return self.standardize(Z) @ self.W.T + self.b

    def predict(self, Z):
        # argmax keeps the first maximum, i.e. the lowest class id
        return np.argmax(self.logits(Z), axis=1)


def _softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def probe_objective(W, b, Zs, labels, reg):
    """Mean cross-entropy plus ``reg * ||W||^2 / 2`` and its gradients."""
    n = Zs.shape[0]
    logits = Zs @ W.T + b
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    value = float(np.mean(log_norm - shifted[np.arange(n), labels])) + 0.5 * reg * float(np.sum(W * W))

    residual = _softmax(logits)
    residual[np.arange(n), labels] -= 1.0
    residual /= n
    return value, residual.T @ Zs + reg * W, residual.sum(axis=0)


def train_probe(Z, labels, reg=DEFAULT_REG, n_classes=None, init_seed=None,
                max_iterations=MAX_ITERATIONS, tolerance=GRADIENT_TOLERANCE):
    """
    Fit a :class:`ProbeModel` by accelerated full-batch gradient descent.

    Steps are scaled per block with a Lipschitz bound of the objective, so the
    unregularized bias converges at the same pace for any ``reg``. Iteration
    stops when the gradient norm drops below ``tolerance``.
    """
    Z = np.asarray(Z, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if Z.ndim != 2 or Z.shape[0] != labels.shape[0]:
        raise ProbeError('%d labels for embedding matrix of shape %s' % (labels.shape[0], Z.shape))
    if np.unique(labels).size < 2:
        raise ProbeError('probe training needs at least 2 classes, got labels %s' % np.unique(labels).tolist())
    if reg < 0:
        raise ProbeError('probe regularization cannot be negative, got %r' % reg)

    k = int(n_classes or labels.max() + 1)
    n, dim = Z.shape
    mean = Z.mean(axis=0)
    scale = Z.std(axis=0)
    scale[scale == 0] = 1.0
    Zs = (Z - mean) / scale

    if init_seed is None:
        W, b = np.zeros((k, dim)), np.zeros(k)
    else:
        rng = np.random.default_rng(init_seed)
        W, b = rng.normal(size=(k, dim)), rng.normal(size=k)

    lipschitz_W = np.linalg.norm(Zs, 2) ** 2 / n + reg
    step_W = 1.0 / lipschitz_W if lipschitz_W > 0 else 1.0
    step_b = 1.0

    y_W, y_b = W.copy(), b.copy()
    t = 1.0
    grad_norm = float('inf')
    iteration = 0
    for iteration in range(1, max_iterations + 1):
        _value, g_W, g_b = probe_objective(y_W, y_b, Zs, labels, reg)
        grad_norm = math.sqrt(float(np.sum(g_W * g_W) + np.sum(g_b * g_b)))
        if grad_norm < tolerance:
            W, b = y_W, y_b
            break
        next_W = y_W - step_W * g_W
        next_b = y_b - step_b * g_b

        # restart the momentum once it points uphill
        if np.sum(g_W * (next_W - W)) + np.sum(g_b * (next_b - b)) > 0:
            t = 1.0
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        momentum = (t - 1.0) / t_next
        y_W = next_W + momentum * (next_W - W)
        y_b = next_b + momentum * (next_b - b)
        W, b, t = next_W, next_b, t_next

    return ProbeModel(W, b, range(k), mean, scale, reg, iteration, grad_norm)


def evaluate(probe, Z, labels):
    """Fraction of rows whose argmax prediction matches the label."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ProbeError('cannot evaluate on an empty test set')
    predictions = probe.predict(Z)
    if predictions.shape != labels.shape:
        raise ProbeError('%d predictions for %d labels' % (predictions.size, labels.size))
    return float(np.mean(predictions == labels))


def select_reg(Z, labels, grid=REG_GRID, default=DEFAULT_REG, folds=REG_FOLDS, seed=0, n_classes=None):
    """
    Pick the probe regularization by stratified CV on the labeled rows.

    Returns ``(reg, scores)``; ``scores`` is empty when some class has fewer
    rows than folds and ``default`` is returned unchanged.
    """
    Z = np.asarray(Z, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    counts = np.bincount(labels)
    if counts[counts > 0].min() < folds:
        return default, OrderedDict()

    assignment = data.stratified_folds(labels, folds, seed)
    scores = OrderedDict()
    for reg in grid:
        accuracies = []
        for f in range(folds):
            train, test = assignment != f, assignment == f
            if np.unique(labels[train]).size < 2:
                continue
            probe = train_probe(Z[train], labels[train], reg, n_classes)
            accuracies.append(evaluate(probe, Z[test], labels[test]))
        scores[reg] = float(np.mean(accuracies)) if accuracies else 0.0
    best = max(scores.values())
    # smallest reg among the best scores
    return min(r for r, s in scores.items() if s == best), scores


# ==============================================================
#   REPORTS
# ==============================================================

class EvalReport(object):
    """Per-fold probe accuracies of one configuration."""

    def __init__(self, accuracies, config_fingerprint, name='LoCL', folds=None, params=None):
        self.accuracies = [float(a) for a in accuracies]
        if not self.accuracies:
            raise ProbeError('an evaluation report needs at least one fold')
        if any(not 0.0 <= a <= 1.0 for a in self.accuracies):
            raise ProbeError('accuracies must lie in [0, 1]: %s' % self.accuracies)
        self.config_fingerprint = config_fingerprint
        self.name = name
        self.folds = folds or []
        self.params = params or {}

    @property
    def mean(self):
        return float(np.mean(self.accuracies))

    @property
    def std(self):
        return float(np.std(self.accuracies))

    def to_dict(self):
        return {
            'name': self.name,
            'accuracies': self.accuracies,
            'mean': self.mean,
            'std': self.std,
            'config_fingerprint': self.config_fingerprint,
            'folds': self.folds,
            'params': self.params,
        }

    @classmethod
    def from_dict(cls, values):
        return cls(values['accuracies'], values['config_fingerprint'], values.get('name', 'LoCL'),
                   values.get('folds'), values.get('params'))


def format_table(reports, title=None):
    """Aligned ``Model Variants | Accuracy | Std`` table, one row per report."""
    rows = [TABLE_HEADER] + [(r.name, '%.4f' % r.mean, '%.3f' % r.std) for r in reports]
    widths = [max(len(row[i]) for row in rows) for i in range(len(TABLE_HEADER))]
    lines = [title] if title else []
    for index, row in enumerate(rows):
        lines.append(' | '.join(cell.ljust(w) if i == 0 else cell.rjust(w)
                                for i, (cell, w) in enumerate(zip(row, widths))).rstrip())
        if index == 0:
            lines.append('-+-'.join('-' * w for w in widths))
    return '\n'.join(lines) + '\n'


# ==============================================================
#   PROTOCOL
# ==============================================================

def fold_seed(seed, fold):
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


def probe_fold(Z, labels, test, labeled, reg=None, seed=0, n_classes=None):
    """
    Train a probe on the ``labeled`` rows of ``Z`` and score it on ``test``.

    ``reg=None`` selects the regularization by CV on the labeled rows.
    """
    scores = OrderedDict()
    if reg is None:
        reg, scores = select_reg(Z[labeled], labels[labeled], seed=seed, n_classes=n_classes)
    probe = train_probe(Z[labeled], labels[labeled], reg, n_classes)
    return {
        'accuracy': evaluate(probe, Z[test], labels[test]),
        'reg': reg,
        'reg_scores': dict((repr(r), s) for r, s in scores.items()),
        'iterations': probe.iterations,
    }


def probe_embeddings(Z, labels, plan, folds=None, reg=None, seed=0, n_classes=None):
    """Probe fixed embeddings on the labeled rows of each fold in ``folds`` (all by default)."""
    outcomes = []
    for fold in range(plan.k) if folds is None else folds:
        test, _unlabeled, labeled = plan.partition(fold)
        outcomes.append(dict(probe_fold(Z, labels, test, labeled, reg, seed, n_classes), fold=fold))
    return outcomes


def run_fold(dataset, config, plan, fold, fold_local_stats=False, search_reg=True):
    """
    Pretrain on the unlabeled rows of ``fold``, probe on its labeled rows and
    score on its test rows. Returns a JSON-friendly dict including the
    collected training events.
    """
    test, unlabeled, labeled = plan.partition(fold)
    if fold_local_stats:
        dataset = data.renormalize(dataset, np.concatenate([unlabeled, labeled]))

    events = []
    result = pretrain(dataset, config, unlabeled,
                      on_event=lambda event, values: events.append((event, dict(values, fold=fold))))
    Z = embed(result.model, dataset).Z

    outcome = probe_fold(Z, dataset.labels, test, labeled, None if search_reg else DEFAULT_REG,
                         config.seed, dataset.n_classes)
    outcome.update(
        fold=fold,
        best_epoch=result.best_epoch,
        epochs=len(result.history),
        seed=config.seed,
        events=events,
    )
    return outcome


def _run_fold_args(args):
    return run_fold(*args)


def run_protocol(dataset, config, k=5, seed=0, plan=None, fold_local_stats=False, search_reg=True,
                 workers=1, on_event=None, name='LoCL'):
    """
    k-fold protocol: per fold, pretrain on the unlabeled share of the training
    partition, probe on the labeled share, test on the held-out fold.

    Fold ``f`` trains with seed ``fold_seed(seed, f)``. With ``workers > 1``
    folds run in separate processes; results and events are merged in fold order.
    """
    if plan is None:
        plan = data.make_folds(dataset, k=k, seed=seed)
    data.audit_leakage(plan)

    jobs = [(dataset, config.replace(seed=fold_seed(seed, f)), plan, f, fold_local_stats, search_reg)
            for f in range(plan.k)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_fold_args, jobs))
    else:
        outcomes = [run_fold(*job) for job in jobs]

    for outcome in outcomes:
        for event, values in outcome.pop('events'):
            if on_event:
                on_event(event, dict(values, cell=name))

    return EvalReport([o['accuracy'] for o in outcomes], config.fingerprint(), name, outcomes)


def run_ablations(dataset, config, k=5, seed=0, plan=None, cells=ABLATION_CELLS, **kwargs):
    """Every ablation cell on one shared fold plan; returns reports in cell order."""
    if plan is None:
        plan = data.make_folds(dataset, k=k, seed=seed)
    reports = []
    for name, changes in cells:
        reports.append(run_protocol(dataset, config.replace(**changes), k, seed, plan=plan, name=name, **kwargs))
    return reports


def run_sweep(dataset, config, alphas=ALPHA_GRID, kernels=KERNEL_GRID, k=5, seed=0, plan=None, **kwargs):
    """
    Cross-validated grid over ``alpha`` and ``kernel_size``.

    Returns ``(reports, best)``; ties on mean accuracy go to the earlier cell.
    The kernel grid collapses to the configured kernel for dense encoders.
    """
    if config.encoder_kind == DENSE:
        kernels = (config.kernel_size,)
    if plan is None:
        plan = data.make_folds(dataset, k=k, seed=seed)
    reports = []
    for alpha in alphas:
        for kernel in kernels:
            cell = config.replace(alpha=alpha, kernel_size=kernel)
            name = 'alpha=%g kernel=%d' % (alpha, kernel)
            report = run_protocol(dataset, cell, k, seed, plan=plan, name=name, **kwargs)
            report.params = {'alpha': alpha, 'kernel_size': kernel}
            reports.append(report)
    best = max(reports, key=lambda r: r.mean)
    return reports, best

