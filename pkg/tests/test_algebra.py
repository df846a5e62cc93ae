"""Unit tests for the anticommuting component algebra."""

import math
import unittest

import numpy as np

from bellsim.algebra import (
    L1,
    L2,
    L3,
    ONE,
    AlgebraElement,
    algebra_mul,
    embed_vector,
    evaluate_at,
    from_matrix,
    phase_operator,
    product_identity,
    to_matrix,
    vector_product,
)
from bellsim.geometry import X_AXIS, Y_AXIS, Z_AXIS, RngStream, UnitVector3, cross, dot, sample_uniform_sphere


def _random_element(rng: RngStream) -> AlgebraElement:
    real = rng.random(4) * 2 - 1
    imag = rng.random(4) * 2 - 1
    return AlgebraElement.from_coefficients(real + 1j * imag)


class TestMultiplicationRules(unittest.TestCase):
    """Test cases for the basis multiplication table."""

    def setUp(self):
        """Set up test fixtures."""
        self.basis = {1: L1, 2: L2, 3: L3}

    def test_anticommutator(self):
        """Test that l_i l_j + l_j l_i = 2 delta_ij exactly."""
        for i, li in self.basis.items():
            for j, lj in self.basis.items():
                anticommutator = li * lj + lj * li
                expected = 2 * ONE if i == j else AlgebraElement()
                np.testing.assert_array_equal(anticommutator.coefficients, expected.coefficients)

    def test_cyclic_products(self):
        """Test that l1 l2 = i l3 and its cyclic permutations hold exactly."""
        for a, b, c in ((L1, L2, L3), (L2, L3, L1), (L3, L1, L2)):
            np.testing.assert_array_equal((a * b).coefficients, (1j * c).coefficients)
            np.testing.assert_array_equal((b * a).coefficients, (-1j * c).coefficients)

    def test_squares_are_one(self):
        for basis in (L1, L2, L3):
            np.testing.assert_array_equal((basis * basis).coefficients, ONE.coefficients)

    def test_one_is_identity(self):
        x = AlgebraElement(1 + 2j, 3, -1j, 0.5)
        self.assertTrue((ONE * x).is_close(x, 0.0))
        self.assertTrue((x * ONE).is_close(x, 0.0))


class TestMatrixHomomorphism(unittest.TestCase):
    """Test cases for the map onto 2x2 Pauli matrices."""

    def test_basis_maps_to_pauli_matrices(self):
        np.testing.assert_array_equal(to_matrix(L2), np.array([[0, -1j], [1j, 0]]))

    def test_product_commutes_with_matrix_map(self):
        """Test that to_matrix(x * y) = to_matrix(x) @ to_matrix(y) on 10^4 random pairs."""
        rng = RngStream(101)
        worst = 0.0
        for _ in range(10_000):
            x, y = _random_element(rng), _random_element(rng)
            error = np.max(np.abs(to_matrix(algebra_mul(x, y)) - to_matrix(x) @ to_matrix(y)))
            worst = max(worst, float(error))
        self.assertLess(worst, 1e-12)

    def test_from_matrix_inverts_to_matrix(self):
        x = _random_element(RngStream(5))
        self.assertTrue(from_matrix(to_matrix(x)).is_close(x))


class TestVectorProductIdentity(unittest.TestCase):
    """Test cases for (a . l)(b . l) = a . b + i (a x b) . l."""

    def test_identity_on_random_pairs(self):
        rng = RngStream(202)
        worst = 0.0
        for _ in range(10_000):
            a, b = sample_uniform_sphere(rng), sample_uniform_sphere(rng)
            product = algebra_mul(embed_vector(a), embed_vector(b))
            error = np.max(np.abs(product.coefficients - product_identity(a, b).coefficients))
            worst = max(worst, float(error))
        self.assertLess(worst, 1e-12)

    def test_batched_product_matches_identity(self):
        rng = RngStream(303)
        u = np.stack([sample_uniform_sphere(rng).as_array() for _ in range(20)])
        v = np.stack([sample_uniform_sphere(rng).as_array() for _ in range(20)])
        batched = vector_product(u, v)
        for i in range(20):
            expected = product_identity(UnitVector3.from_array(u[i]), UnitVector3.from_array(v[i]))
            np.testing.assert_allclose(batched[i], expected.coefficients, atol=1e-12)

    def test_matched_settings_give_scalar_one(self):
        a = UnitVector3.normalized(1, -2, 2)
        product = product_identity(a, a)
        self.assertEqual(product.scalar_part, 1.0)
        np.testing.assert_array_equal(product.vector_part, np.zeros(3))

    def test_scalar_part_is_dot_and_vector_part_is_cross(self):
        a, b = X_AXIS, UnitVector3.planar(math.pi / 3)
        product = product_identity(a, b)
        self.assertAlmostEqual(product.scalar_part.real, dot(a, b), delta=1e-15)
        np.testing.assert_allclose(product.vector_part, 1j * cross(a, b), atol=1e-15)


class TestPhaseOperator(unittest.TestCase):
    """Test cases for the exp(i theta n . l) representation."""

    def test_phase_operator_equals_product(self):
        rng = RngStream(404)
        for _ in range(100):
            a, b = sample_uniform_sphere(rng), sample_uniform_sphere(rng)
            self.assertTrue(phase_operator(a, b).is_close(product_identity(a, b), 1e-12))

    def test_parallel_and_antiparallel_drop_axis(self):
        self.assertTrue(phase_operator(Z_AXIS, Z_AXIS).is_close(ONE))
        self.assertTrue(phase_operator(Z_AXIS, -Z_AXIS).is_close(-ONE))

    def test_phase_operator_is_unitary(self):
        u = phase_operator(X_AXIS, Y_AXIS)
        self.assertTrue((u * u.conjugate()).is_close(ONE, 1e-12))


class TestEvaluation(unittest.TestCase):
    """Test cases for substituting a real direction into an element."""

    def test_evaluate_embedded_vector_is_dot_product(self):
        a, lam = UnitVector3.normalized(1, 2, 2), UnitVector3.normalized(0, 1, 1)
        self.assertAlmostEqual(evaluate_at(embed_vector(a), lam).real, dot(a, lam), delta=1e-15)

    def test_evaluate_product_identity(self):
        a, b, lam = X_AXIS, Y_AXIS, Z_AXIS
        self.assertEqual(evaluate_at(product_identity(a, b), lam), 1j)


if __name__ == "__main__":
    unittest.main()
