import unittest

import numpy as np

from gwm_segment.errors import ConfigError, DimensionMismatch
from gwm_segment.motion.models import (
    CoordNormalization,
    ModelFamily,
    MotionModelParams,
    design_matrix,
    lift,
    residual_map,
    synthesize_flow,
)


class TestModelFamily(unittest.TestCase):
    def test_dimensions(self):
        self.assertEqual(
            [(f.dim, f.num_params) for f in ModelFamily], [(0, 2), (2, 6), (5, 12)]
        )

    def test_parse(self):
        self.assertIs(ModelFamily.parse("Quadratic12"), ModelFamily.QUADRATIC12)
        with self.assertRaises(ConfigError):
            ModelFamily.parse("projective")


class TestLift(unittest.TestCase):
    def test_quadratic_basis(self):
        np.testing.assert_allclose(
            lift(np.array([0.5, -1.0]), ModelFamily.QUADRATIC12), [0.5, 0.25, -1.0, 1.0, -0.5]
        )

    def test_affine_and_constant(self):
        np.testing.assert_allclose(lift(np.array([0.5, -1.0]), ModelFamily.AFFINE), [0.5, -1.0])
        self.assertEqual(lift(np.zeros((4, 3, 2)), ModelFamily.CONSTANT).shape, (4, 3, 0))

    def test_design_matrix_has_constant_column(self):
        X = design_matrix(CoordNormalization(4, 3), ModelFamily.AFFINE)
        self.assertEqual(X.shape, (12, 3))
        self.assertTrue(np.all(X[:, -1] == 1.0))
        # row-major: second row is pixel (x=1, y=0)
        np.testing.assert_allclose(X[1, :2], [-1.0 / 3.0, -1.0])

    def test_constant_design_matrix_is_a_column_of_ones(self):
        X = design_matrix(CoordNormalization(5, 4), ModelFamily.CONSTANT)
        self.assertEqual(X.shape, (20, 1))
        self.assertTrue(np.all(X == 1.0))


class TestCoordNormalization(unittest.TestCase):
    def test_corners(self):
        grid = CoordNormalization(5, 3).grid()
        np.testing.assert_allclose(grid[0, 0], [-1.0, -1.0])
        np.testing.assert_allclose(grid[2, 4], [1.0, 1.0])
        np.testing.assert_allclose(grid[1, 2], [0.0, 0.0])

    def test_single_pixel_axis(self):
        grid = CoordNormalization(1, 4).grid()
        self.assertTrue(np.all(grid[..., 0] == 0.0))

    def test_denormalize_inverts(self):
        norm = CoordNormalization(48, 32)
        points = np.array([[0.0, 0.0], [47.0, 31.0], [12.5, 7.25]])
        np.testing.assert_allclose(norm.denormalize(norm.normalize(points)), points)

    def test_for_shape_takes_height_first(self):
        self.assertEqual(CoordNormalization.for_shape((3, 7)), CoordNormalization(7, 3))


class TestMotionModelParams(unittest.TestCase):
    def test_matrix_roundtrip(self):
        M = np.arange(6, dtype=float).reshape(2, 3)
        params = MotionModelParams.from_matrix("affine", M)
        np.testing.assert_array_equal(params.matrix(), M)
        np.testing.assert_array_equal(params.b, [2.0, 5.0])
        with self.assertRaises(DimensionMismatch):
            MotionModelParams.from_matrix("affine", np.zeros((2, 4)))

    def test_dict_roundtrip(self):
        params = MotionModelParams(ModelFamily.QUADRATIC12, np.ones((2, 5)), [0.5, -0.5])
        back = MotionModelParams.from_dict(params.to_dict())
        np.testing.assert_array_equal(back.matrix(), params.matrix())
        constant = MotionModelParams.from_dict(MotionModelParams.zero("constant").to_dict())
        self.assertEqual(constant.A.shape, (2, 0))

    def test_synthesized_flow_has_zero_residual(self):
        params = MotionModelParams(ModelFamily.AFFINE, [[1.0, 0.5], [-0.25, 2.0]], [0.1, -0.3])
        flow = synthesize_flow(params, 9, 6)
        self.assertLess(float(residual_map(flow, params).max()), 1e-10)

    def test_synthesize_rejects_mismatched_norm(self):
        with self.assertRaises(DimensionMismatch):
            synthesize_flow(MotionModelParams.zero("constant"), 4, 4, CoordNormalization(4, 5))


if __name__ == "__main__":
    unittest.main()
