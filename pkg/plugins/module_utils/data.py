# -*- coding: utf-8 -*-
#
# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""
CSV ingestion, preprocessing and stratified fold planning.
"""

from __future__ import absolute_import, division, print_function
__metaclass__ = type

import hashlib
import math
import os
import re
import traceback

from ansible_collections.tabular.locl.plugins.module_utils import container
from ansible_collections.tabular.locl.plugins.module_utils.errors import DataError

try:
    import numpy as np
    HAS_NUMPY = True
    NUMPY_IMPORT_ERROR = None
except ImportError:
    HAS_NUMPY = False
    NUMPY_IMPORT_ERROR = traceback.format_exc()

try:
    import pandas as pd
    HAS_PANDAS = True
    PANDAS_IMPORT_ERROR = None
except ImportError:
    HAS_PANDAS = False
    PANDAS_IMPORT_ERROR = traceback.format_exc()

try:
    from sklearn.model_selection import ShuffleSplit, StratifiedKFold, StratifiedShuffleSplit
    HAS_SKLEARN = True
    SKLEARN_IMPORT_ERROR = None
except ImportError:
    HAS_SKLEARN = False
    SKLEARN_IMPORT_ERROR = traceback.format_exc()


NUMERIC = 'numeric'
CATEGORICAL = 'categorical'

NORMALIZATION_MODES = ('zscore', 'minmax')


def _frozen(array):
    array = np.array(array, dtype=np.float64)
    array.setflags(write=False)
    return array


class RawTable(object):
    """Columns exactly as read from the CSV, typed but untransformed."""

    def __init__(self, column_names, columns, kinds):
        if len(set(column_names)) != len(column_names):
            dupes = sorted(set(n for n in column_names if column_names.count(n) > 1))
            raise DataError('duplicate column names: %s' % ', '.join(dupes))
        if not (len(column_names) == len(columns) == len(kinds)):
            raise DataError('column names, columns and kinds disagree in length')

        lengths = set(len(c) for c in columns)
        if len(lengths) > 1:
            raise DataError('columns have different lengths: %s' % sorted(lengths))

        self.column_names = tuple(column_names)
        self.columns = tuple(columns)
        self.kinds = tuple(kinds)
        self.row_count = lengths.pop() if lengths else 0

    def column(self, name):
        try:
            return self.columns[self.column_names.index(name)]
        except ValueError:
            raise DataError('column %r not found' % name)

    def kind(self, name):
        return self.kinds[self.column_names.index(name)]


class TabularDataset(object):
    """
    Preprocessed numeric matrix plus the metadata needed to reproduce it.

    :X:             ndarray N x m, read-only
    :feature_names: tuple of str, one-hot columns are named ``column=value``
    :labels:        ndarray of int class ids in [0, K) or None
    :norm_stats:    tuple of dicts, one per feature (kind, source, shift, scale)
    :classes:       tuple of str, the original label value of each class id
    :report:        dict describing dropped columns and one-hot expansions
    """

    def __init__(self, X, feature_names, labels=None, norm_stats=None, classes=(), report=None):
        X = _frozen(X)
        if X.ndim != 2:
            raise DataError('feature matrix must be 2-D, got shape %s' % (X.shape,))
        if X.shape[1] != len(feature_names):
            raise DataError('%d feature names for %d columns' % (len(feature_names), X.shape[1]))
        if not np.all(np.isfinite(X)):
            raise DataError('feature matrix contains missing or non-finite values')

        if labels is not None:
            labels = np.array(labels, dtype=np.int64)
            labels.setflags(write=False)
            if labels.shape != (X.shape[0],):
                raise DataError('%d labels for %d rows' % (labels.shape[0], X.shape[0]))
            n_classes = len(classes) if classes else int(labels.max(initial=-1)) + 1
            if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
                raise DataError('label ids must lie in [0, %d)' % n_classes)

        self.X = X
        self.feature_names = tuple(feature_names)
        self.labels = labels
        self.norm_stats = tuple(norm_stats or ({'kind': 'identity', 'shift': 0.0, 'scale': 1.0},) * X.shape[1])
        self.classes = tuple(classes)
        self.report = report or {}

    @property
    def n_rows(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def n_classes(self):
        if self.labels is None:
            return 0
        return len(self.classes) if self.classes else int(self.labels.max(initial=-1)) + 1

    def take(self, rows):
        """Row subset sharing the feature set and normalization metadata."""
        rows = np.asarray(rows, dtype=np.int64)
        labels = None if self.labels is None else self.labels[rows]
        return TabularDataset(self.X[rows], self.feature_names, labels, self.norm_stats,
                              self.classes, self.report)


# ==============================================================
#   CSV INGESTION
# ==============================================================

def _ragged_index(error):
    match = re.search(r'line (\d+)', str(error))
    if match:
        return int(match.group(1)) - 1
    return None


def load_csv(path, schema_hint=None):
    """
    Read a comma separated file with a header row.

    A column is numeric when every non-empty cell parses as a finite decimal
    number, unless ``schema_hint`` maps its name to ``numeric`` or ``categorical``.
    Row indices in error messages count the header as row 0.
    """
    schema_hint = schema_hint or {}
    for name, kind in schema_hint.items():
        if kind not in (NUMERIC, CATEGORICAL):
            raise DataError('schema hint for %r must be numeric or categorical, got %r' % (name, kind))

    if not os.access(path, os.R_OK):
        raise DataError("%s doesn't exist or not readable" % path)

    try:
        frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False,
                            engine='python', skip_blank_lines=True, encoding='utf-8')
    except pd.errors.EmptyDataError:
        raise DataError('empty table: %s' % path)
    except pd.errors.ParserError as e:
        index = _ragged_index(e)
        if index is None:
            raise DataError('failed to parse %s: %s' % (path, e))
        raise DataError('ragged row at index %d' % index)
    except (IOError, OSError, UnicodeDecodeError) as e:
        raise DataError('failed to read %s: %s' % (path, e))

    short = frame.isna().any(axis=1)
    if short.any():
        raise DataError('ragged row at index %d' % int(np.flatnonzero(short.values)[0]))

    if frame.shape[0] < 2:
        raise DataError('empty table: %s has a header but no rows' % path)

    header = [str(h).strip() for h in frame.iloc[0].tolist()]
    unknown = sorted(set(schema_hint) - set(header))
    if unknown:
        raise DataError('schema hint names unknown columns: %s' % ', '.join(unknown))

    columns = []
    kinds = []
    for j, name in enumerate(header):
        cells = frame.iloc[1:, j].str.strip()
        parsed = pd.to_numeric(cells.where(cells != ''), errors='coerce')
        present = (cells != '').values
        parses = np.isfinite(parsed.values.astype(np.float64)) | ~present

        kind = schema_hint.get(name)
        if kind is None:
            kind = NUMERIC if present.any() and parses.all() else CATEGORICAL

        if kind == NUMERIC:
            bad = np.flatnonzero(~parses)
            if bad.size:
                raise DataError('cell %r in numeric column %r at row index %d is not a number'
                                % (cells.iloc[bad[0]], name, bad[0] + 1))
            empty = np.flatnonzero(~present)
            if empty.size:
                raise DataError('missing value in numeric column %r at row index %d' % (name, empty[0] + 1))
            columns.append(parsed.values.astype(np.float64))
        else:
            columns.append(tuple(cells.tolist()))
        kinds.append(kind)

    return RawTable(header, columns, kinds)


# ==============================================================
#   PREPROCESSING
# ==============================================================

def _moments(values):
    # fsum keeps the statistics independent of row order
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((values - mean) ** 2) / n
    return mean, math.sqrt(var)


def _normalization(values, mode):
    mean, std = _moments(values)
    if mode == 'zscore':
        return mean, std, std
    lo, hi = float(np.min(values)), float(np.max(values))
    return lo, hi - lo, std


def _first_appearance(cells):
    seen = {}
    for cell in cells:
        if cell not in seen:
            seen[cell] = len(seen)
    return list(seen)


def _label_ids(table, label_column):
    if label_column not in table.column_names:
        raise DataError('label column %r not found' % label_column)

    cells = table.column(label_column)
    if table.kind(label_column) == NUMERIC:
        values = np.asarray(cells)
        if not np.all(values == np.round(values)):
            raise DataError('label column %r must be categorical or integer-valued' % label_column)
        cells = ['%d' % v for v in values]

    classes = _first_appearance(cells)
    if len(classes) < 2:
        raise DataError('label column %r has a single distinct value' % label_column)

    lookup = dict((c, i) for i, c in enumerate(classes))
    return np.array([lookup[c] for c in cells], dtype=np.int64), classes


def preprocess(table, label_column, mode='zscore'):
    """
    Turn a :class:`RawTable` into a :class:`TabularDataset`.

    Categorical columns are one-hot expanded in place, in category
    first-appearance order. Numeric columns are normalized with statistics
    of the whole table (population standard deviation). Columns whose raw
    standard deviation is zero are dropped and listed in ``report['dropped']``.
    """
    if mode not in NORMALIZATION_MODES:
        raise DataError('normalization mode must be one of %s, got %r' % (', '.join(NORMALIZATION_MODES), mode))

    labels, classes = _label_ids(table, label_column)

    features = []
    names = []
    stats = []
    dropped = []
    one_hot = {}

    for name, kind, cells in zip(table.column_names, table.kinds, table.columns):
        if name == label_column:
            continue

        if kind == NUMERIC:
            shift, scale, std = _normalization(cells, mode)
            if std == 0.0:
                dropped.append(name)
                continue
            features.append((cells - shift) / scale)
            names.append(name)
            stats.append({'kind': mode, 'source': name, 'shift': shift, 'scale': scale})
            continue

        categories = _first_appearance(cells)
        if len(categories) < 2:
            dropped.append(name)
            continue
        one_hot[name] = categories
        cells = np.asarray(cells, dtype=object)
        for category in categories:
            features.append((cells == category).astype(np.float64))
            names.append('%s=%s' % (name, category))
            stats.append({'kind': 'onehot', 'source': name, 'shift': 0.0, 'scale': 1.0})

    if not features:
        raise DataError('all features dropped: %s' % ', '.join(dropped))

    report = {
        'label_column': label_column,
        'mode': mode,
        'classes': classes,
        'dropped': dropped,
        'one_hot': one_hot,
        'norm_stats': stats,
        'n_rows': table.row_count,
        'n_features': len(names),
    }
    return TabularDataset(np.column_stack(features), names, labels, stats, classes, report)


def denormalize(dataset):
    """Invert the stored normalization, giving raw values for numeric features."""
    shift = np.array([s['shift'] for s in dataset.norm_stats])
    scale = np.array([s['scale'] for s in dataset.norm_stats])
    return dataset.X * scale + shift


def renormalize(dataset, rows):
    """
    Recompute numeric normalization from ``rows`` only (fold-local statistics).

    Features constant on ``rows`` keep a scale of 1 so the feature set is unchanged.
    """
    raw = denormalize(dataset)
    subset = raw[np.asarray(rows, dtype=np.int64)]
    columns = []
    stats = []
    for j, stat in enumerate(dataset.norm_stats):
        if stat['kind'] not in NORMALIZATION_MODES:
            columns.append(raw[:, j])
            stats.append(dict(stat))
            continue
        shift, scale, std = _normalization(subset[:, j], stat['kind'])
        if std == 0.0:
            scale = 1.0
        columns.append((raw[:, j] - shift) / scale)
        stats.append(dict(stat, shift=shift, scale=scale))

    report = dict(dataset.report, norm_stats=stats, fold_local=True)
    return TabularDataset(np.column_stack(columns), dataset.feature_names, dataset.labels,
                          stats, dataset.classes, report)


def dataset_fingerprint(dataset):
    digest = hashlib.sha256()
    digest.update(container.canonical_json(list(dataset.feature_names)).encode('utf-8'))
    digest.update(np.ascontiguousarray(dataset.X, dtype='<f8').tobytes())
    if dataset.labels is not None:
        digest.update(np.ascontiguousarray(dataset.labels, dtype='<i8').tobytes())
    return digest.hexdigest()


def dump_dataset(dataset):
    manifest = {
        'feature_names': list(dataset.feature_names),
        'classes': list(dataset.classes),
        'norm_stats': list(dataset.norm_stats),
        'report': dataset.report,
        'fingerprint': dataset_fingerprint(dataset),
    }
    arrays = [('X', dataset.X)]
    if dataset.labels is not None:
        arrays.append(('labels', dataset.labels))
    return container.pack('dataset', manifest, arrays)


def load_dataset(data):
    manifest, arrays = container.unpack(data, kind='dataset')
    labels = arrays.get('labels')
    if labels is not None:
        labels = labels.astype(np.int64)
    dataset = TabularDataset(arrays['X'], manifest['feature_names'], labels,
                             manifest['norm_stats'], manifest['classes'], manifest['report'])
    if dataset_fingerprint(dataset) != manifest['fingerprint']:
        raise DataError('dataset artifact fingerprint does not match its contents')
    return dataset


# ==============================================================
#   FOLD PLANNING
# ==============================================================

class FoldPlan(object):
    """
    Stratified k-fold assignment plus, per fold, which training rows are unlabeled.

    :fold_assignments: ndarray N of fold ids in [0, k)
    :unlabeled_mask:   ndarray k x N of bool; row f marks the unlabeled rows of
                       the training partition of fold f (test rows are always False)
    """

    def __init__(self, fold_assignments, unlabeled_mask, seed, unlabeled_fraction):
        self.fold_assignments = np.asarray(fold_assignments, dtype=np.int64)
        self.unlabeled_mask = np.asarray(unlabeled_mask, dtype=bool)
        self.fold_assignments.setflags(write=False)
        self.unlabeled_mask.setflags(write=False)
        self.seed = seed
        self.unlabeled_fraction = unlabeled_fraction

    @property
    def k(self):
        return self.unlabeled_mask.shape[0]

    def partition(self, fold):
        """Return ``(test, unlabeled, labeled)`` row indices for ``fold``."""
        if not 0 <= fold < self.k:
            raise DataError('fold %d out of range [0, %d)' % (fold, self.k))
        test = self.fold_assignments == fold
        unlabeled = self.unlabeled_mask[fold]
        labeled = ~test & ~unlabeled
        return np.flatnonzero(test), np.flatnonzero(unlabeled), np.flatnonzero(labeled)

    def to_dict(self):
        return {
            'seed': self.seed,
            'unlabeled_fraction': self.unlabeled_fraction,
            'fold_assignments': self.fold_assignments.tolist(),
            'unlabeled_mask': self.unlabeled_mask.astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, values):
        try:
            plan = cls(values['fold_assignments'], values['unlabeled_mask'], values['seed'],
                       values['unlabeled_fraction'])
        except KeyError as e:
            raise DataError('fold plan lacks %s' % e)
        if plan.unlabeled_mask.ndim != 2 or plan.unlabeled_mask.shape[1] != plan.fold_assignments.size:
            raise DataError('fold plan mask has shape %s for %d rows'
                            % (plan.unlabeled_mask.shape, plan.fold_assignments.size))
        return plan


def stratified_folds(labels, k, seed):
    """
    Fold id of every row from a shuffled ``StratifiedKFold``.

    Per-class counts, and fold sizes, differ by at most one between folds.
    """
    labels = np.asarray(labels, dtype=np.int64)
    folds = np.empty(labels.size, dtype=np.int64)
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    for fold, (_train, test) in enumerate(splitter.split(np.zeros((labels.size, 1)), labels)):
        folds[test] = fold
    return folds


def _unlabeled_rows(train, labels, n_unlabeled, random_state):
    n_labeled = train.size - n_unlabeled
    if n_unlabeled == 0:
        return train[:0]
    if n_labeled == 0:
        return train

    y = labels[train]
    counts = np.bincount(y)
    counts = counts[counts > 0]
    if counts.min() >= 2 and min(n_unlabeled, n_labeled) >= counts.size:
        splitter = StratifiedShuffleSplit(n_splits=1, test_size=n_unlabeled, random_state=random_state)
    else:
        # too few rows to stratify the split
        splitter = ShuffleSplit(n_splits=1, test_size=n_unlabeled, random_state=random_state)
    _labeled, unlabeled = next(splitter.split(np.zeros((train.size, 1)), y))
    return np.sort(train[unlabeled])


def make_folds(dataset, k=5, unlabeled_fraction=0.9, seed=0):
    """
    Deterministic stratified fold plan.

    Folds come from :func:`stratified_folds`. Within the training partition of
    each fold exactly ``ceil(unlabeled_fraction * |train|)`` rows are marked
    unlabeled by a stratified shuffle split, so the labeled remainder keeps the
    class proportions of the partition.
    """
    if k < 2:
        raise DataError('k must be at least 2, got %d' % k)
    if not 0.0 <= unlabeled_fraction < 1.0:
        raise DataError('unlabeled_fraction must lie in [0, 1), got %r' % unlabeled_fraction)
    if dataset.labels is None:
        raise DataError('fold planning needs labels')

    labels = dataset.labels
    counts = np.bincount(labels, minlength=dataset.n_classes)
    small = [c for c in range(len(counts)) if counts[c] < k]
    if small:
        names = [dataset.classes[c] if dataset.classes else str(c) for c in small]
        raise DataError('classes with fewer than %d instances: %s' % (k, ', '.join(names)))

    folds = stratified_folds(labels, k, seed)
    random_state = np.random.RandomState(seed)
    mask = np.zeros((k, dataset.n_rows), dtype=bool)
    for f in range(k):
        train = np.flatnonzero(folds != f)
        n_unlabeled = int(math.ceil(unlabeled_fraction * train.size - 1e-9))
        mask[f, _unlabeled_rows(train, labels, n_unlabeled, random_state)] = True

    return FoldPlan(folds, mask, seed, unlabeled_fraction)


def audit_leakage(plan):
    """Raise :class:`DataError` if any fold lets test rows into training."""
    everything = np.arange(plan.fold_assignments.size)
    for fold in range(plan.k):
        test, unlabeled, labeled = plan.partition(fold)
        if np.intersect1d(test, unlabeled).size or np.intersect1d(test, labeled).size:
            raise DataError('fold %d: test rows leak into the training partition' % fold)
        if np.intersect1d(unlabeled, labeled).size:
            raise DataError('fold %d: rows marked both labeled and unlabeled' % fold)
        if not np.array_equal(np.union1d(np.union1d(test, unlabeled), labeled), everything):
            raise DataError('fold %d: partition does not cover every row' % fold)
