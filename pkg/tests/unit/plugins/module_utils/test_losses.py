from __future__ import absolute_import, division, print_function

__metaclass__ = type

import unittest

import numpy as np

from ansible_collections.tabular.locl.plugins.module_utils import losses, tensor_nn
from ansible_collections.tabular.locl.plugins.module_utils.errors import LossError
from ansible_collections.tabular.locl.tests.unit.plugins.module_utils.utils import numeric_grad, relative_error


class ReconstructionLossTestCase(unittest.TestCase):

    def test_perfect_reconstruction(self):
        x = np.arange(6.0).reshape(2, 3)
        self.assertEqual(losses.reconstruction_loss(x, x, x, x), 0.0)

    def test_one_branch_residual(self):
        x1 = np.zeros((1, 4))
        x2 = np.ones((1, 4))
        self.assertEqual(losses.reconstruction_loss(x1 + 1, x1, x2, x2), 2.0)

    def test_symmetric_under_branch_swap(self):
        rng = np.random.default_rng(3)
        a, b, c, d = (rng.normal(size=(3, 4)) for _i in range(4))
        self.assertAlmostEqual(losses.reconstruction_loss(a, b, c, d), losses.reconstruction_loss(c, d, a, b))

    def test_padding_is_ignored(self):
        x = np.zeros((2, 4))
        x_hat = np.zeros((2, 4))
        x_hat[:, 3] = 100.0
        self.assertEqual(losses.reconstruction_loss(x_hat, x, x, x, valid1=[1, 1, 1, 0]), 0.0)

    def test_shape_mismatch(self):
        with self.assertRaisesRegex(LossError, 'branch 2'):
            losses.reconstruction_loss(np.zeros((2, 3)), np.zeros((2, 3)), np.zeros((2, 3)), np.zeros((2, 4)))


class CrossCorrelationTestCase(unittest.TestCase):

    def test_hand_fixture(self):
        z = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
        c = losses.cross_correlation(z, z)
        # unit variance columns, scaled by 1/sqrt(1 + eps)
        np.testing.assert_allclose(c, np.eye(2) / (1.0 + 1e-5), rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(c, np.eye(2), atol=1e-5)

    def test_bounded_by_one(self):
        rng = np.random.default_rng(5)
        for _trial in range(20):
            c = losses.cross_correlation(rng.normal(size=(16, 5)), rng.normal(size=(16, 5)))
            self.assertTrue(np.all(np.abs(c) <= 1 + 1e-9))

    def test_affine_invariance(self):
        rng = np.random.default_rng(6)
        z1 = rng.normal(size=(32, 4))
        z2 = rng.normal(size=(32, 4))
        scale = rng.uniform(0.5, 3.0, size=4)
        shift = rng.normal(size=4)
        # row i picks up s*sqrt(v + eps)/sqrt(s^2 v + eps) from the epsilon in the standardization
        var = z1.var(axis=0)
        eps = tensor_nn.BATCHNORM_EPSILON
        factor = scale * np.sqrt(var + eps) / np.sqrt(scale ** 2 * var + eps)
        shifted = losses.cross_correlation(z1 * scale + shift, z2)
        expected = losses.cross_correlation(z1, z2) * factor[:, None]
        np.testing.assert_allclose(shifted, expected, rtol=1e-10, atol=1e-13)
        np.testing.assert_allclose(shifted, losses.cross_correlation(z1, z2), atol=1e-4)

    def test_affine_invariance_at_small_scale(self):
        rng = np.random.default_rng(6)
        z1 = rng.normal(size=(32, 4))
        z2 = rng.normal(size=(32, 4))
        diff = losses.cross_correlation(z1 * 0.5, z2) - losses.cross_correlation(z1, z2)
        self.assertGreater(np.abs(diff).max(), 0.0)
        self.assertLess(np.abs(diff).max(), 10 * tensor_nn.BATCHNORM_EPSILON)

    def test_shape_errors(self):
        with self.assertRaises(LossError):
            losses.cross_correlation(np.zeros((4, 2)), np.zeros((4, 3)))
        with self.assertRaisesRegex(LossError, 'at least 2'):
            losses.cross_correlation(np.zeros((1, 2)), np.zeros((1, 2)))


class BarlowTwinsLossTestCase(unittest.TestCase):

    def test_identity_is_minimum(self):
        self.assertEqual(losses.barlow_twins_loss(np.eye(4)), 0.0)

    def test_zero_matrix(self):
        self.assertEqual(losses.barlow_twins_loss(np.zeros((3, 3)), lam=0.7), 3.0)

    def test_off_diagonal_weight(self):
        c = np.array([[1.0, 0.5], [0.5, 1.0]])
        self.assertAlmostEqual(losses.barlow_twins_loss(c, 0.005), 0.0025, places=15)

    def test_invariant_to_shared_column_permutation(self):
        rng = np.random.default_rng(8)
        z1 = rng.normal(size=(10, 5))
        z2 = rng.normal(size=(10, 5))
        p = rng.permutation(5)
        self.assertAlmostEqual(losses.barlow_twins_loss(losses.cross_correlation(z1, z2)),
                               losses.barlow_twins_loss(losses.cross_correlation(z1[:, p], z2[:, p])), places=12)

    def test_gradient(self):
        c = np.random.default_rng(9).uniform(-1, 1, size=(3, 3))
        grad = losses.barlow_twins_grad(c, 0.3)
        self.assertLess(relative_error(grad, numeric_grad(lambda: losses.barlow_twins_loss(c, 0.3), c)), 1e-6)


class CombinedLossTestCase(unittest.TestCase):

    def test_arithmetic(self):
        self.assertEqual(losses.combined_loss(0.0, 0.0).l_total, 0.0)
        self.assertEqual(losses.combined_loss(1.0, 2.0, alpha=0.5).l_total, 2.0)

    def test_zero_alpha_keeps_reconstruction_logged(self):
        report = losses.combined_loss(1.5, 4.0, alpha=0.0)
        self.assertEqual(report.l_total, 1.5)
        self.assertEqual(report.l_reconstruction, 4.0)

    def test_summary_of_correlation(self):
        report = losses.combined_loss(0.0, 0.0, c=np.array([[1.0, 0.5], [0.5, 0.0]]))
        self.assertEqual(report.c_diag_mean, 0.5)
        self.assertEqual(report.c_offdiag_mean_sq, 0.25)
        self.assertEqual(sorted(report.to_dict()), sorted(losses.LossReport.__slots__))

    def test_negative_reconstruction(self):
        with self.assertRaises(LossError):
            losses.combined_loss(0.0, -1.0)


class TwinObjectiveTestCase(unittest.TestCase):

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(10)
        z1, z2 = rng.normal(size=(6, 3)), rng.normal(size=(6, 3))
        x1, x2 = rng.normal(size=(6, 4)), rng.normal(size=(6, 5))
        x_hat1, x_hat2 = rng.normal(size=(6, 4)), rng.normal(size=(6, 5))
        valid2 = np.array([1.0, 1.0, 1.0, 1.0, 0.0])

        def loss():
            return losses.twin_objective(z1, z2, x_hat1, x1, x_hat2, x2, 0.7, 0.05, None, valid2)[0].l_total

        report, grads = losses.twin_objective(z1, z2, x_hat1, x1, x_hat2, x2, 0.7, 0.05, None, valid2)
        self.assertAlmostEqual(report.l_total, report.l_contrastive + 0.7 * report.l_reconstruction)
        for name, array in (('z1', z1), ('z2', z2), ('x_hat1', x_hat1), ('x_hat2', x_hat2)):
            self.assertLess(relative_error(grads[name], numeric_grad(loss, array)), 1e-6, name)
