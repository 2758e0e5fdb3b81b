"""
Tests for the motion-anticipation loss and its gradient.
"""

import unittest

import numpy as np

from gwm_segment.errors import DimensionMismatch, EmptyDataset, NonFiniteLogit
from gwm_segment.flowfield.containers import FlowField
from gwm_segment.motion.energy import (
    SoftMasks,
    dataset_risk,
    gradient_check,
    gwm_grad_logits,
    gwm_loss,
    resolve_weight_floor,
)
from gwm_segment.motion.models import (
    CoordNormalization,
    ModelFamily,
    MotionModelParams,
    design_matrix,
    synthesize_flow,
)


def _two_motion_flow(height: int = 8, width: int = 12) -> tuple[FlowField, np.ndarray]:
    """Left half moves by (1, 0), right half by (0, 2); returns the flow and the split."""
    labels = np.zeros((height, width), dtype=np.int64)
    labels[:, width // 2 :] = 1
    data = np.where(labels[..., None] == 0, [1.0, 0.0], [0.0, 2.0])
    return FlowField(data), labels


def _two_affine_flow(height: int = 8, width: int = 10) -> tuple[FlowField, np.ndarray]:
    """Two affine motions on the left and right halves of the frame."""
    left = MotionModelParams(ModelFamily.AFFINE, [[0.5, -0.25], [1.0, 0.0]], [1.0, -1.0])
    right = MotionModelParams(ModelFamily.AFFINE, [[-1.0, 0.75], [0.0, 0.5]], [-2.0, 0.5])
    labels = np.zeros((height, width), dtype=np.int64)
    labels[:, width // 2 :] = 1
    data = np.where(
        labels[..., None] == 0,
        synthesize_flow(left, width, height).data,
        synthesize_flow(right, width, height).data,
    )
    return FlowField(data), labels


def _untied_sites(residuals: np.ndarray, rng: np.random.Generator, count: int) -> list[tuple[int, int, int]]:
    """Random (y, x, k) entries at pixels whose component residuals are pairwise more than 1e-6 apart."""
    r = np.sort(np.moveaxis(residuals, 0, -1), axis=-1)
    untied = np.all(np.diff(r, axis=-1) > 1e-6, axis=-1) if r.shape[-1] > 1 else np.ones(r.shape[:2], bool)
    ys, xs = np.nonzero(untied)
    picks = rng.choice(len(ys), size=min(count, len(ys)), replace=False)
    K = residuals.shape[0]
    return [(int(ys[i]), int(xs[i]), int(rng.integers(K))) for i in picks]


class TestSoftMasks(unittest.TestCase):
    def test_from_logits_sums_to_one(self):
        rng = np.random.default_rng(0)
        masks = SoftMasks.from_logits(rng.standard_normal((3, 4, 5)) * 50)
        np.testing.assert_allclose(masks.probs.sum(axis=-1), 1.0)

    def test_rejects_invalid_probabilities(self):
        with self.assertRaises(ValueError):
            SoftMasks(np.full((2, 2, 2), 0.4))
        with self.assertRaises(DimensionMismatch):
            SoftMasks(np.ones((2, 2)))

    def test_from_labels_and_argmax(self):
        labels = np.array([[0, 2], [1, 1]])
        masks = SoftMasks.from_labels(labels, K=4)
        self.assertEqual(masks.K, 4)
        np.testing.assert_array_equal(masks.argmax().data, labels)
        np.testing.assert_allclose(masks.mass(), [1.0, 2.0, 1.0, 0.0])

    def test_permuted(self):
        masks = SoftMasks.from_labels(np.array([[0, 1]]))
        np.testing.assert_array_equal(masks.permuted([1, 0]).argmax().data, [[1, 0]])


class TestGwmLoss(unittest.TestCase):
    def test_true_segmentation_has_zero_loss(self):
        flow, labels = _two_motion_flow()
        report = gwm_loss(flow, SoftMasks.from_labels(labels), ModelFamily.CONSTANT)
        self.assertLess(report.total, 1e-12)
        np.testing.assert_allclose(report.per_component[0].b, [1.0, 0.0], atol=1e-6)
        np.testing.assert_allclose(report.per_component[1].b, [0.0, 2.0], atol=1e-6)

    def test_single_component_loss_is_flow_variance(self):
        flow, _ = _two_motion_flow()
        report = gwm_loss(flow, SoftMasks.uniform(12, 8, 1), ModelFamily.CONSTANT, ridge=0.0)
        # per-pixel variance of a 50/50 mix of (1, 0) and (0, 2)
        self.assertAlmostEqual(report.total, 0.25 + 1.0, places=9)

    def test_invariant_to_component_order(self):
        rng = np.random.default_rng(1)
        flow = FlowField(rng.standard_normal((6, 7, 2)))
        masks = SoftMasks.from_logits(rng.standard_normal((6, 7, 3)))
        a = gwm_loss(flow, masks, "affine").total
        b = gwm_loss(flow, masks.permuted([2, 0, 1]), "affine").total
        self.assertAlmostEqual(a, b, places=12)

    def test_degenerate_component_contributes_nothing(self):
        flow, labels = _two_motion_flow()
        report = gwm_loss(flow, SoftMasks.from_labels(labels, K=3), ModelFamily.AFFINE)
        self.assertTrue(report.per_component[2].degenerate)
        self.assertEqual(report.per_component[2].energy, 0.0)
        self.assertFalse(report.per_component[0].degenerate)
        self.assertTrue(np.all(np.isfinite(report.residuals)))
        self.assertLess(report.total, 1e-12)

    def test_total_matches_weighted_residual_sum(self):
        rng = np.random.default_rng(23)
        flow = FlowField(rng.standard_normal((7, 6, 2)))
        masks = SoftMasks.from_logits(rng.standard_normal((7, 6, 3)))
        report = gwm_loss(flow, masks, "affine", ridge=0.0)
        direct = float(np.sum(np.moveaxis(masks.probs, -1, 0) * report.residuals)) / 42
        self.assertAlmostEqual(report.total, direct, delta=1e-9 * report.total)

    def test_appending_an_empty_component_keeps_the_loss(self):
        rng = np.random.default_rng(24)
        flow = FlowField(rng.standard_normal((6, 6, 2)))
        masks = SoftMasks.from_logits(rng.standard_normal((6, 6, 2)))
        padded = SoftMasks(np.concatenate([masks.probs, np.zeros((6, 6, 1))], axis=-1))
        base = gwm_loss(flow, masks, "quadratic12").total
        self.assertGreater(base, 0.0)
        self.assertAlmostEqual(gwm_loss(flow, padded, "quadratic12").total, base, delta=1e-12)

    def test_hard_assignment_beats_uniform_masks(self):
        flow, labels = _two_affine_flow()
        hard = gwm_loss(flow, SoftMasks.from_labels(labels), ModelFamily.AFFINE).total
        uniform = gwm_loss(flow, SoftMasks.uniform(10, 8, 2), ModelFamily.AFFINE, ridge=0.0).total
        self.assertLessEqual(hard, 1e-9)
        self.assertGreater(uniform, hard)

        # with p = 1/2 both components fit the whole frame at half weight
        X = design_matrix(CoordNormalization.for_shape(flow.shape), ModelFamily.AFFINE)
        F = flow.data.reshape(-1, 2).astype(np.float64)
        M = np.linalg.lstsq(X, F, rcond=None)[0].T
        residual = np.sum((F - X @ M.T) ** 2, axis=1)
        direct = 2 * float(np.sum(0.5 * residual)) / 80
        self.assertAlmostEqual(uniform, direct, delta=1e-9 * direct)

    def test_weight_floor(self):
        self.assertAlmostEqual(resolve_weight_floor(100, None), 1e-6)
        self.assertEqual(resolve_weight_floor(100, 0.5), 0.5)

    def test_lattice_mismatch(self):
        flow, _ = _two_motion_flow()
        with self.assertRaises(DimensionMismatch):
            gwm_loss(flow, SoftMasks.uniform(3, 3, 2), "affine")


class TestGradient(unittest.TestCase):
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        for family in ModelFamily:
            with self.subTest(family=family.value):
                flow = FlowField(rng.standard_normal((6, 7, 2)) * 2.0)
                logits = rng.standard_normal((6, 7, 3))
                self.assertLess(gradient_check(flow, logits, family), 1e-4)

    def test_matches_finite_differences_on_random_instances(self):
        rng = np.random.default_rng(20)
        families = list(ModelFamily)
        for i in range(50):
            family = families[i % len(families)]
            K = int(rng.integers(2, 5))
            flow = FlowField(rng.standard_normal((6, 6, 2)) * rng.uniform(0.5, 3.0))
            logits = rng.standard_normal((6, 6, K)) * 2.0
            report, _ = gwm_grad_logits(flow, logits, family)
            sites = _untied_sites(report.residuals, rng, count=12)
            with self.subTest(instance=i, family=family.value, K=K):
                self.assertLess(gradient_check(flow, logits, family, sites=sites), 1e-4)

    def test_single_component_has_zero_gradient(self):
        rng = np.random.default_rng(21)
        flow = FlowField(rng.standard_normal((5, 6, 2)))
        _, grad = gwm_grad_logits(flow, rng.standard_normal((5, 6, 1)), "affine")
        self.assertTrue(np.all(grad == 0.0))

    def test_equal_residuals_give_zero_gradient(self):
        # identical masks fit identical models, so every pixel sees equal residuals
        rng = np.random.default_rng(22)
        flow = FlowField(rng.standard_normal((5, 6, 2)))
        report, grad = gwm_grad_logits(flow, np.zeros((5, 6, 3)), "quadratic12")
        np.testing.assert_allclose(report.residuals[0], report.residuals[2], rtol=1e-9)
        np.testing.assert_allclose(grad, 0.0, atol=1e-12)

    def test_gradient_is_zero_mean_across_components(self):
        rng = np.random.default_rng(3)
        flow = FlowField(rng.standard_normal((5, 5, 2)))
        _, grad = gwm_grad_logits(flow, rng.standard_normal((5, 5, 4)), "quadratic12")
        np.testing.assert_allclose(grad.sum(axis=-1), 0.0, atol=1e-14)

    def test_constant_shift_of_logits(self):
        rng = np.random.default_rng(4)
        flow = FlowField(rng.standard_normal((5, 6, 2)))
        logits = rng.standard_normal((5, 6, 2))
        shift = rng.standard_normal((5, 6, 1)) * 10
        a, grad_a = gwm_grad_logits(flow, logits, "affine")
        b, grad_b = gwm_grad_logits(flow, logits + shift, "affine")
        self.assertAlmostEqual(a.total, b.total, places=10)
        np.testing.assert_allclose(grad_a, grad_b, atol=1e-12)

    def test_non_finite_logits(self):
        flow = FlowField.zeros(3, 3)
        logits = np.zeros((3, 3, 2))
        logits[0, 0, 1] = np.inf
        with self.assertRaises(NonFiniteLogit):
            gwm_grad_logits(flow, logits, "affine")


class TestDatasetRisk(unittest.TestCase):
    def test_mean_of_frame_losses(self):
        rng = np.random.default_rng(5)
        frames = []
        for _ in range(3):
            flow = FlowField(rng.standard_normal((6, 6, 2)))
            frames.append((flow, SoftMasks.from_logits(rng.standard_normal((6, 6, 2)))))
        expected = np.mean([gwm_loss(f, m, "affine").total for f, m in frames])
        self.assertAlmostEqual(dataset_risk(frames, "affine"), float(expected), places=12)

    def test_identical_frames_match_one_frame(self):
        rng = np.random.default_rng(25)
        flow = FlowField(rng.standard_normal((6, 6, 2)))
        masks = SoftMasks.from_logits(rng.standard_normal((6, 6, 3)))
        single = gwm_loss(flow, masks, "affine").total
        self.assertAlmostEqual(dataset_risk([(flow, masks)], "affine"), single, places=15)
        self.assertAlmostEqual(dataset_risk([(flow, masks), (flow, masks)], "affine"), single, places=15)

    def test_accepts_mask_factories(self):
        flow, labels = _two_motion_flow()
        risk = dataset_risk([(flow, lambda: SoftMasks.from_labels(labels))], "constant")
        self.assertLess(risk, 1e-12)

    def test_empty(self):
        with self.assertRaises(EmptyDataset):
            dataset_risk([], "affine")


if __name__ == "__main__":
    unittest.main()
