"""Unit tests for vector geometry, random streams and sphere sampling."""

import math
import unittest

import numpy as np

from bellsim.geometry import (
    DRAWS_PER_SPHERE_SAMPLE,
    X_AXIS,
    Y_AXIS,
    Z_AXIS,
    RngStream,
    UnitVector3,
    cross,
    dot,
    dot_rows,
    relative_angle,
    rotate,
    rotation_matrix,
    sample_uniform_sphere,
    sample_uniform_sphere_many,
)

# Upper 0.1% point of the chi-square distribution with 11 degrees of freedom
CHI_SQUARE_11_CRITICAL = 31.264


class TestUnitVector3(unittest.TestCase):
    """Test cases for the UnitVector3 class."""

    def test_normalized_has_unit_norm(self):
        v = UnitVector3.normalized(3.0, 4.0, 12.0)
        self.assertAlmostEqual(v.x ** 2 + v.y ** 2 + v.z ** 2, 1.0, delta=1e-12)
        self.assertAlmostEqual(v.x, 3.0 / 13.0, delta=1e-15)

    def test_zero_vector_is_rejected(self):
        with self.assertRaises(ValueError):
            UnitVector3.normalized(0.0, 0.0, 0.0)

    def test_non_unit_components_are_rejected(self):
        with self.assertRaises(ValueError):
            UnitVector3(1.0, 1.0, 0.0)

    def test_non_finite_components_are_rejected(self):
        with self.assertRaises(ValueError):
            UnitVector3(float("nan"), 0.0, 0.0)
        with self.assertRaises(ValueError):
            UnitVector3.planar(float("inf"))

    def test_planar_and_negation(self):
        v = UnitVector3.planar(math.pi / 2)
        self.assertAlmostEqual(v.y, 1.0, delta=1e-15)
        self.assertEqual((-v).as_tuple(), (-v.x, -v.y, -v.z))

    def test_iteration_yields_components(self):
        self.assertEqual(list(Z_AXIS), [0.0, 0.0, 1.0])


class TestDotAndCross(unittest.TestCase):
    """Test cases for dot, cross and relative_angle."""

    def test_orthogonal_axes(self):
        self.assertEqual(dot(X_AXIS, Y_AXIS), 0.0)
        np.testing.assert_array_equal(cross(X_AXIS, Y_AXIS), Z_AXIS.as_array())

    def test_matched_settings_give_exact_one(self):
        """Test that a vector dotted with itself snaps to exactly 1."""
        rng = RngStream(7)
        for _ in range(1000):
            v = sample_uniform_sphere(rng)
            self.assertEqual(dot(v, v), 1.0)
            self.assertEqual(dot(v, -v), -1.0)

    def test_dot_is_clamped(self):
        self.assertEqual(dot((1.0 + 1e-9, 0.0, 0.0), X_AXIS), 1.0)

    def test_dot_rows_matches_dot(self):
        rng = RngStream(3)
        u = sample_uniform_sphere_many(rng, 50)
        v = sample_uniform_sphere_many(rng, 50)
        rows = dot_rows(u, v)
        for i in range(50):
            self.assertAlmostEqual(rows[i], dot(u[i], v[i]), delta=1e-15)

    def test_relative_angle(self):
        self.assertAlmostEqual(relative_angle(X_AXIS, Y_AXIS), math.pi / 2, delta=1e-15)
        self.assertEqual(relative_angle(X_AXIS, X_AXIS), 0.0)
        self.assertAlmostEqual(relative_angle(X_AXIS, -X_AXIS), math.pi, delta=1e-15)

    def test_relative_angle_accurate_near_parallel(self):
        v = UnitVector3.planar(1e-9)
        self.assertAlmostEqual(relative_angle(X_AXIS, v), 1e-9, delta=1e-20)

    def test_rotation_preserves_angles(self):
        matrix = rotation_matrix(Z_AXIS, math.pi / 2)
        rotated = rotate(matrix, X_AXIS)
        self.assertAlmostEqual(rotated.y, 1.0, delta=1e-15)
        a, b = UnitVector3.normalized(1, 2, 3), UnitVector3.normalized(-2, 0, 1)
        m = rotation_matrix(UnitVector3.normalized(1, 1, 0), 0.7)
        self.assertAlmostEqual(dot(rotate(m, a), rotate(m, b)), dot(a, b), delta=1e-12)


class TestRngStream(unittest.TestCase):
    """Test cases for the RngStream class."""

    def test_same_identity_same_sequence(self):
        np.testing.assert_array_equal(RngStream(42, 3).random(100), RngStream(42, 3).random(100))

    def test_different_streams_differ(self):
        self.assertFalse(np.array_equal(RngStream(42, 3).random(10), RngStream(42, 4).random(10)))
        self.assertFalse(np.array_equal(RngStream(42, 3).random(10), RngStream(43, 3).random(10)))

    def test_children_are_independent_of_parent_use(self):
        parent = RngStream(5)
        first = parent.child(2).random(5)
        parent.random(1000)
        np.testing.assert_array_equal(parent.child(2).random(5), first)
        self.assertEqual(len(parent.split(4)), 4)

    def test_rejects_out_of_range_seed(self):
        with self.assertRaises(ValueError):
            RngStream(-1)
        with self.assertRaises(ValueError):
            RngStream(2 ** 64)

    def test_integers_in_range(self):
        values = RngStream(1).integers(2, 1000)
        self.assertTrue(set(np.unique(values)) <= {0, 1})


class TestSphereSampling(unittest.TestCase):
    """Test cases for uniform sphere sampling."""

    def setUp(self):
        """Set up test fixtures."""
        self.n = 100_000
        self.samples = sample_uniform_sphere_many(RngStream(2024, 11), self.n)

    def test_samples_are_unit_vectors(self):
        norms = np.linalg.norm(self.samples, axis=1)
        self.assertLess(float(np.max(np.abs(norms - 1.0))), 1e-12)

    def test_single_and_block_sampling_agree(self):
        """Test that one-at-a-time draws replay the block draws exactly."""
        rng = RngStream(2024, 11)
        for i in range(20):
            v = sample_uniform_sphere(rng)
            np.testing.assert_array_equal(v.as_array(), self.samples[i])

    def test_consumes_two_draws_per_sample(self):
        rng = RngStream(9)
        sample_uniform_sphere_many(rng, 10)
        reference = RngStream(9)
        reference.random(10 * DRAWS_PER_SPHERE_SAMPLE)
        self.assertEqual(rng.random(), reference.random())

    def test_moments(self):
        """Test that component means vanish and second moments are 1/3."""
        n = self.n
        for k in range(3):
            column = self.samples[:, k]
            self.assertLess(abs(column.mean()), 4.0 * math.sqrt(1.0 / 3.0 / n))
            # Var(x^2) = 1/5 - 1/9 for a uniform direction
            self.assertLess(abs((column ** 2).mean() - 1.0 / 3.0), 4.0 * math.sqrt((1 / 5 - 1 / 9) / n))

    def test_chi_square_uniformity(self):
        """Test uniformity over 12 equal-area cells (3 z-bands by 4 azimuth sectors)."""
        z = self.samples[:, 2]
        phi = np.mod(np.arctan2(self.samples[:, 1], self.samples[:, 0]), 2 * math.pi)
        band = np.minimum(((z + 1.0) / 2.0 * 3).astype(int), 2)
        sector = np.minimum((phi / (2 * math.pi) * 4).astype(int), 3)
        counts = np.bincount(band * 4 + sector, minlength=12)
        expected = self.n / 12
        chi_square = float(np.sum((counts - expected) ** 2 / expected))
        self.assertLess(chi_square, CHI_SQUARE_11_CRITICAL)


if __name__ == "__main__":
    unittest.main()
