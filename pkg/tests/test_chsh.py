"""Unit tests for the CHSH combination and settings."""

import math
import unittest

import numpy as np

from bellsim.chsh import (
    CANONICAL_ANGLES_DEG,
    LOCAL_BOUND,
    TSIRELSON_BOUND,
    ChshResult,
    ChshSettings,
    chsh_combination,
    enumerate_chsh_assignments,
)
from bellsim.geometry import UnitVector3
from bellsim.models.base import ParticleKind
from bellsim.models.quantum import qm_correlation
from bellsim.statistics import CorrelationEstimate


class TestChshCombination(unittest.TestCase):
    """Test cases for the single-trial combination."""

    def test_all_sixteen_assignments_give_plus_or_minus_two(self):
        assignments = enumerate_chsh_assignments()
        self.assertEqual(len(assignments), 16)
        self.assertEqual(len({values for values, _ in assignments}), 16)
        for _, value in assignments:
            self.assertIn(value, (-2, 2))

    def test_combination_signs(self):
        self.assertEqual(chsh_combination(1, 1, 1, 1), 2)
        self.assertEqual(chsh_combination(1, -1, 1, -1), 2)
        self.assertEqual(chsh_combination(1, 1, -1, 1), -2)


class TestChshSettings(unittest.TestCase):
    """Test cases for the ChshSettings class."""

    def test_canonical_spin_settings(self):
        settings = ChshSettings.canonical()
        self.assertAlmostEqual(settings.a_prime.y, 1.0, delta=1e-15)
        self.assertAlmostEqual(settings.b.x, math.sqrt(0.5), delta=1e-15)
        self.assertEqual(settings.pair(1, 0), (settings.a_prime, settings.b))

    def test_photon_settings_double_the_angles(self):
        spin = ChshSettings.from_angles((0.0, 90.0, 45.0, 135.0), "spin")
        photon = ChshSettings.canonical(ParticleKind.PHOTON)
        for a, b in zip(
            (spin.a, spin.a_prime, spin.b, spin.b_prime), (photon.a, photon.a_prime, photon.b, photon.b_prime)
        ):
            np.testing.assert_allclose(a.as_array(), b.as_array(), atol=1e-15)

    def test_wrong_number_of_angles(self):
        with self.assertRaises(ValueError):
            ChshSettings.from_angles((0.0, 90.0, 45.0))

    def test_canonical_angles(self):
        self.assertEqual(ChshSettings.canonical_angles("photon"), CANONICAL_ANGLES_DEG[ParticleKind.PHOTON])


class TestChshResult(unittest.TestCase):
    """Test cases for the ChshResult class."""

    def setUp(self):
        """Set up test fixtures."""
        self.settings = ChshSettings.canonical()

    def _exact_result(self, correlation) -> ChshResult:
        estimates = []
        for index_a, index_b in ((0, 0), (1, 0), (0, 1), (1, 1)):
            a, b = self.settings.pair(index_a, index_b)
            estimates.append(CorrelationEstimate.exact("qm", a, b, correlation(a, b)))
        return ChshResult(self.settings, tuple(estimates))

    def test_quantum_closed_form_reaches_tsirelson_value(self):
        result = self._exact_result(qm_correlation)
        self.assertAlmostEqual(result.s_value, -TSIRELSON_BOUND, delta=1e-12)
        self.assertEqual(result.s_stderr, 0.0)
        self.assertTrue(result.violates_local_bound)

    def test_signs_follow_the_combination(self):
        """Test that S = P(a,b) + P(a',b) - P(a,b') + P(a',b')."""
        values = {(0, 0): 0.1, (1, 0): 0.2, (0, 1): 0.4, (1, 1): 0.8}
        estimates = tuple(
            CorrelationEstimate.exact("x", *self.settings.pair(*pair), value) for pair, value in values.items()
        )
        self.assertAlmostEqual(ChshResult(self.settings, estimates).s_value, 0.1 + 0.2 - 0.4 + 0.8, delta=1e-15)

    def test_stderr_in_quadrature(self):
        estimates = tuple(
            CorrelationEstimate.from_values("x", *self.settings.pair(*pair), np.array([1.0, -1.0, 1.0, -1.0]))
            for pair in ((0, 0), (1, 0), (0, 1), (1, 1))
        )
        result = ChshResult(self.settings, estimates)
        self.assertAlmostEqual(result.s_stderr, 2.0 * estimates[0].stderr, delta=1e-15)
        self.assertFalse(result.violates_local_bound)

    def test_to_dict(self):
        record = self._exact_result(qm_correlation).to_dict()
        self.assertEqual(record["local_bound"], LOCAL_BOUND)
        self.assertEqual([c["term"] for c in record["correlations"]], ["P(a,b)", "P(a',b)", "P(a,b')", "P(a',b')"])
        self.assertAlmostEqual(record["abs_s"], 2 * math.sqrt(2), delta=1e-12)

    def test_planar_settings_are_unit_vectors(self):
        for vector in (self.settings.a, self.settings.a_prime, self.settings.b, self.settings.b_prime):
            self.assertIsInstance(vector, UnitVector3)


if __name__ == "__main__":
    unittest.main()
