from __future__ import absolute_import, division, print_function

__metaclass__ = type

import unittest
from unittest.mock import patch

import numpy as np
import pytest

from ansible_collections.tabular.locl.plugins.module_utils import data, evaluation
from ansible_collections.tabular.locl.plugins.module_utils.errors import ProbeError
from ansible_collections.tabular.locl.plugins.module_utils.pipeline import TrainConfig
from ansible_collections.tabular.locl.tests.unit.plugins.module_utils.utils import (
    numeric_grad,
    relative_error,
    synthetic_dataset,
)


def blobs(n_per_class=30, dim=4, n_classes=3, spread=0.2, seed=0):
    rng = np.random.default_rng(seed)
    centers = 5.0 * np.eye(n_classes, dim)
    labels = np.repeat(np.arange(n_classes), n_per_class)
    return centers[labels] + spread * rng.normal(size=(labels.size, dim)), labels


def tiny_config(**changes):
    values = dict(batch_size=4, latent_dim=4, channel_plan=[2, 2, 2], max_epochs=1, patience=1)
    values.update(changes)
    return TrainConfig(**values)


class TrainProbeTestCase(unittest.TestCase):

    def test_separable_blobs(self):
        Z, labels = blobs()
        probe = evaluation.train_probe(Z, labels)
        self.assertEqual(evaluation.evaluate(probe, Z, labels), 1.0)

    def test_heavy_regularization_predicts_majority(self):
        rng = np.random.default_rng(1)
        Z = rng.normal(size=(40, 3))
        labels = np.array([0, 0, 0, 1] * 10)
        probe = evaluation.train_probe(Z, labels, reg=1e6)
        np.testing.assert_array_equal(probe.predict(Z), np.zeros(40))

    def test_objective_gradient(self):
        rng = np.random.default_rng(2)
        Zs = rng.normal(size=(7, 3))
        labels = np.array([0, 1, 2, 1, 0, 2, 2])
        W = rng.normal(size=(3, 3))
        b = rng.normal(size=3)

        def value():
            return evaluation.probe_objective(W, b, Zs, labels, 0.1)[0]

        _value, g_W, g_b = evaluation.probe_objective(W, b, Zs, labels, 0.1)
        self.assertLess(relative_error(g_W, numeric_grad(value, W)), 1e-6)
        self.assertLess(relative_error(g_b, numeric_grad(value, b)), 1e-6)

    def test_same_optimum_from_any_start(self):
        rng = np.random.default_rng(3)
        Z = rng.normal(size=(50, 4))
        labels = (Z[:, 0] + 0.5 * rng.normal(size=50) > 0).astype(int)
        Zs = (Z - Z.mean(axis=0)) / Z.std(axis=0)
        objectives = []
        for init_seed in (None, 1, 2, 3, 4):
            probe = evaluation.train_probe(Z, labels, reg=1e-2, init_seed=init_seed)
            objectives.append(evaluation.probe_objective(probe.W, probe.b, Zs, labels, 1e-2)[0])
        self.assertLess(max(objectives) - min(objectives), 1e-6)

    def test_single_class(self):
        with self.assertRaisesRegex(ProbeError, 'at least 2 classes'):
            evaluation.train_probe(np.zeros((4, 2)), [1, 1, 1, 1])

    def test_negative_regularization(self):
        Z, labels = blobs()
        with self.assertRaises(ProbeError):
            evaluation.train_probe(Z, labels, reg=-1.0)

    def test_label_count_mismatch(self):
        with self.assertRaises(ProbeError):
            evaluation.train_probe(np.zeros((4, 2)), [0, 1, 0])

    def test_unseen_class_keeps_its_row(self):
        Z, labels = blobs(n_classes=2)
        probe = evaluation.train_probe(Z, labels, n_classes=3)
        self.assertEqual(probe.W.shape, (3, 4))
        self.assertEqual(probe.classes, (0, 1, 2))


class EvaluateTestCase(unittest.TestCase):

    def test_all_correct(self):
        Z, labels = blobs(seed=4)
        probe = evaluation.train_probe(Z, labels)
        test_Z, test_labels = blobs(n_per_class=10, seed=5)
        self.assertEqual(evaluation.evaluate(probe, test_Z, test_labels), 1.0)

    def test_random_labels_score_near_chance(self):
        rng = np.random.default_rng(6)
        probe = evaluation.train_probe(rng.normal(size=(400, 5)), rng.integers(0, 4, size=400))
        accuracy = evaluation.evaluate(probe, rng.normal(size=(4000, 5)), rng.integers(0, 4, size=4000))
        self.assertLess(abs(accuracy - 0.25), 0.05)

    def test_empty_test_set(self):
        Z, labels = blobs()
        probe = evaluation.train_probe(Z, labels)
        with self.assertRaisesRegex(ProbeError, 'empty test set'):
            evaluation.evaluate(probe, np.zeros((0, 4)), [])

    def test_ties_go_to_lowest_class(self):
        probe = evaluation.ProbeModel(np.zeros((3, 2)), np.zeros(3), range(3), np.zeros(2), np.ones(2))
        np.testing.assert_array_equal(probe.predict(np.ones((4, 2))), np.zeros(4))

    def test_embedding_width_checked(self):
        probe = evaluation.ProbeModel(np.zeros((2, 2)), np.zeros(2), range(2), np.zeros(2), np.ones(2))
        with self.assertRaisesRegex(ProbeError, 'expects 2 embedding columns'):
            probe.predict(np.zeros((3, 5)))


class SelectRegTestCase(unittest.TestCase):

    def test_picks_from_grid(self):
        Z, labels = blobs(spread=2.0, seed=7)
        reg, scores = evaluation.select_reg(Z, labels)
        self.assertIn(reg, evaluation.REG_GRID)
        self.assertEqual(list(scores), list(evaluation.REG_GRID))
        self.assertEqual(scores[reg], max(scores.values()))

    def test_ties_take_smallest(self):
        Z, labels = blobs(seed=8)
        reg, scores = evaluation.select_reg(Z, labels, grid=(1.0, 1e-2, 1e-3))
        self.assertEqual(set(scores.values()), {1.0})
        self.assertEqual(reg, 1e-3)

    def test_small_classes_fall_back_to_default(self):
        Z, labels = blobs(n_per_class=2)
        reg, scores = evaluation.select_reg(Z, labels, default=0.5)
        self.assertEqual(reg, 0.5)
        self.assertEqual(len(scores), 0)

    def test_inner_folds_come_from_the_shared_planner(self):
        Z, labels = blobs(seed=9)
        with patch.object(data, 'stratified_folds', wraps=data.stratified_folds) as planner:
            evaluation.select_reg(Z, labels, seed=4)
        planner.assert_called_once()
        self.assertEqual(planner.call_args[0][1:], (evaluation.REG_FOLDS, 4))


class EvalReportTestCase(unittest.TestCase):

    def test_mean_and_std(self):
        report = evaluation.EvalReport([0.5, 1.0], 'abc')
        self.assertEqual(report.mean, 0.75)
        self.assertEqual(report.std, 0.25)

    def test_dict_round_trip(self):
        report = evaluation.EvalReport([0.8, 0.9], 'abc', 'LoCL - Dense layer', params={'alpha': 1.0})
        again = evaluation.EvalReport.from_dict(report.to_dict())
        self.assertEqual(again.to_dict(), report.to_dict())

    def test_invalid_accuracy(self):
        with self.assertRaises(ProbeError):
            evaluation.EvalReport([1.2], 'abc')
        with self.assertRaises(ProbeError):
            evaluation.EvalReport([], 'abc')

    def test_format_table(self):
        table = evaluation.format_table([evaluation.EvalReport([0.5, 1.0], 'a'),
                                         evaluation.EvalReport([0.9], 'b', 'LoCL - Dense layer')], title='income')
        lines = table.splitlines()
        self.assertEqual(lines[0], 'income')
        self.assertEqual([cell.strip() for cell in lines[1].split('|')], ['Model Variants', 'Accuracy', 'Std'])
        self.assertEqual([cell.strip() for cell in lines[3].split('|')], ['LoCL', '0.7500', '0.250'])
        self.assertEqual([cell.strip() for cell in lines[4].split('|')], ['LoCL - Dense layer', '0.9000', '0.000'])
        self.assertTrue(table.endswith('\n'))


class ProtocolTestCase(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.dataset = synthetic_dataset(n=60, m=8, seed=11)
        cls.plan = data.make_folds(cls.dataset, k=3, unlabeled_fraction=0.5, seed=0)

    def test_fold_seeds_differ(self):
        self.assertNotEqual(evaluation.fold_seed(0, 0), evaluation.fold_seed(0, 1))
        self.assertEqual(evaluation.fold_seed(4, 2), evaluation.fold_seed(4, 2))

    def test_one_accuracy_per_fold(self):
        events = []
        report = evaluation.run_protocol(self.dataset, tiny_config(), plan=self.plan,
                                         on_event=lambda name, values: events.append(values))
        self.assertEqual(len(report.accuracies), 3)
        self.assertEqual([f['fold'] for f in report.folds], [0, 1, 2])
        self.assertTrue(all(0.0 <= a <= 1.0 for a in report.accuracies))
        self.assertEqual(report.config_fingerprint, tiny_config().fingerprint())
        self.assertEqual(sorted(set(e['fold'] for e in events)), [0, 1, 2])
        self.assertTrue(all(e['cell'] == 'LoCL' for e in events))
        self.assertFalse(any('events' in f for f in report.folds))

    def test_deterministic(self):
        first = evaluation.run_protocol(self.dataset, tiny_config(), plan=self.plan, search_reg=False)
        second = evaluation.run_protocol(self.dataset, tiny_config(), plan=self.plan, search_reg=False)
        self.assertEqual(first.accuracies, second.accuracies)
        self.assertEqual([f['reg'] for f in first.folds], [evaluation.DEFAULT_REG] * 3)

    def test_fold_local_statistics(self):
        outcome = evaluation.run_fold(self.dataset, tiny_config(), self.plan, 1, fold_local_stats=True)
        self.assertEqual(outcome['fold'], 1)
        self.assertTrue(0.0 <= outcome['accuracy'] <= 1.0)

    def test_probe_embeddings(self):
        Z = np.asarray(self.dataset.X)
        outcomes = evaluation.probe_embeddings(Z, self.dataset.labels, self.plan, folds=[2], reg=1e-2)
        self.assertEqual(len(outcomes), 1)
        self.assertEqual(outcomes[0]['fold'], 2)
        self.assertEqual(outcomes[0]['reg'], 1e-2)

    def test_ablations_in_cell_order(self):
        reports = evaluation.run_ablations(self.dataset, tiny_config(), plan=self.plan, search_reg=False)
        self.assertEqual([r.name for r in reports], [name for name, _changes in evaluation.ABLATION_CELLS])
        self.assertEqual(reports[1].config_fingerprint, tiny_config(encoder_kind='dense').fingerprint())

    def test_sweep(self):
        reports, best = evaluation.run_sweep(self.dataset, tiny_config(), alphas=(0.5, 1.0), kernels=(3, 5),
                                             plan=self.plan, search_reg=False)
        self.assertEqual([r.params for r in reports],
                         [{'alpha': 0.5, 'kernel_size': 3}, {'alpha': 0.5, 'kernel_size': 5},
                          {'alpha': 1.0, 'kernel_size': 3}, {'alpha': 1.0, 'kernel_size': 5}])
        self.assertEqual(best.mean, max(r.mean for r in reports))
        self.assertIs(best, [r for r in reports if r.mean == best.mean][0])

    def test_dense_sweep_ignores_kernels(self):
        reports, _best = evaluation.run_sweep(self.dataset, tiny_config(encoder_kind='dense', channel_plan=[1, 1, 1]),
                                              alphas=(1.0,), kernels=(3, 5, 7), plan=self.plan, search_reg=False)
        self.assertEqual([r.params for r in reports], [{'alpha': 1.0, 'kernel_size': 3}])


@pytest.mark.parametrize('accuracies, expected', [
    ([1.0, 1.0, 1.0], 0.0),
    ([0.0, 1.0], 0.5),
])
def test_population_std(accuracies, expected):
    assert evaluation.EvalReport(accuracies, 'x').std == expected
