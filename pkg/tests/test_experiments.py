"""Unit tests for estimates, sweeps, CHSH runs and the auditor."""

import math
import unittest
from unittest.mock import patch

import numpy as np

from bellsim.chsh import TSIRELSON_BOUND, ChshSettings
from bellsim.exceptions import EstimationError
from bellsim.experiments import audit_model, chsh, estimate_correlation, sweep
from bellsim.geometry import X_AXIS, UnitVector3, rotate, rotation_matrix
from bellsim.models.algebraic import AlgebraicModel
from bellsim.models.base import PairOutcomeBatch, TrialStreams, tile_setting
from bellsim.models.quantum import QuantumSingletModel
from bellsim.models.sign import SignModel, lhv_correlation_closed_form
from bellsim.statistics import CorrelationEstimate, merge_estimates

# Absolute floor for estimators whose per-trial value is deterministic
FLOOR = 1e-12

GRID_13 = [i * math.pi / 12 for i in range(13)]


def within(value: float, target: float, stderr: float, sigmas: float = 4.0) -> bool:
    return abs(value - target) <= sigmas * stderr + FLOOR


class TestEstimateCorrelation(unittest.TestCase):
    """Test cases for estimate_correlation."""

    def setUp(self):
        """Set up test fixtures."""
        self.qm = QuantumSingletModel()
        self.sign = SignModel()
        self.algebraic = AlgebraicModel()

    def test_matched_settings_give_exact_minus_one(self):
        for model in (self.qm, self.sign, self.algebraic):
            for n in (1, 1000):
                estimate = estimate_correlation(model, X_AXIS, X_AXIS, n, seed=1)
                self.assertEqual(estimate.mean, -1.0, model.name)
                self.assertEqual(estimate.stderr, 0.0, model.name)

    def test_zero_trials_rejected(self):
        with self.assertRaises(EstimationError):
            estimate_correlation(self.qm, X_AXIS, X_AXIS, 0, seed=1)

    def test_algebraic_orthogonal_settings_average_to_zero(self):
        b = UnitVector3.planar(math.pi / 2)
        estimate = estimate_correlation(self.algebraic, X_AXIS, b, 200_000, seed=5)
        self.assertTrue(within(estimate.mean, 0.0, estimate.stderr))
        self.assertTrue(within(estimate.im_mean, 0.0, estimate.im_stderr))

    def test_sign_model_at_quarter_pi(self):
        b = UnitVector3.planar(math.pi / 4)
        estimate = estimate_correlation(self.sign, X_AXIS, b, 200_000, seed=6)
        self.assertTrue(within(estimate.mean, -0.5, estimate.stderr))
        # Differs from the quantum value by more than 0.2
        self.assertGreater(abs(estimate.mean - (-math.cos(math.pi / 4))), 0.2)

    def test_deterministic_given_seed(self):
        b = UnitVector3.planar(1.0)
        first = estimate_correlation(self.qm, X_AXIS, b, 5000, seed=7)
        second = estimate_correlation(self.qm, X_AXIS, b, 5000, seed=7)
        self.assertEqual(first, second)
        other = estimate_correlation(self.qm, X_AXIS, b, 5000, seed=8)
        self.assertNotEqual(first.mean, other.mean)

    def test_thread_count_does_not_change_result(self):
        """Test that an 8-thread run matches the serial run bit for bit."""
        b = UnitVector3.planar(0.7)
        for model in (self.qm, self.algebraic):
            serial = estimate_correlation(model, X_AXIS, b, 50_000, seed=9, threads=1, block_size=4096)
            parallel = estimate_correlation(model, X_AXIS, b, 50_000, seed=9, threads=8, block_size=4096)
            self.assertEqual(serial.mean, parallel.mean)
            self.assertEqual(serial.m2, parallel.m2)
            self.assertEqual(serial.im_mean, parallel.im_mean)

    def test_blocked_estimate_merges_its_blocks_in_order(self):
        """Test that a blocked run equals the merge of its blocks run one by one."""
        b = UnitVector3.planar(2.0)
        blocked = estimate_correlation(self.sign, X_AXIS, b, 10_000, seed=3, block_size=1000)
        parts = []
        products = []
        for k in range(10):
            batch = self.sign.run_block(
                tile_setting(X_AXIS, 1000), tile_setting(b, 1000), TrialStreams.for_block(3, 0, k)
            )
            products.append(batch.products())
            parts.append(CorrelationEstimate.from_values(self.sign.name, X_AXIS, b, batch.products()))
        self.assertEqual(blocked, merge_estimates(parts))
        self.assertEqual(blocked.n, 10_000)
        self.assertAlmostEqual(blocked.mean, float(np.mean(np.concatenate(products))), delta=1e-12)
        self.assertTrue(within(blocked.mean, lhv_correlation_closed_form(2.0), blocked.stderr))

    def test_global_rotation_leaves_correlations_unchanged(self):
        """Test that P(Ra, Rb) agrees with P(a, b) for every model."""
        matrix = rotation_matrix(UnitVector3.normalized(1, 2, 3), 1.1)
        a = UnitVector3.normalized(0.3, -0.2, 0.9)
        b = UnitVector3.normalized(-0.5, 0.4, 0.6)
        for model in (self.qm, self.sign, self.algebraic):
            plain = estimate_correlation(model, a, b, 200_000, seed=10, stream=0)
            rotated = estimate_correlation(model, rotate(matrix, a), rotate(matrix, b), 200_000, seed=10, stream=1)
            combined = math.hypot(plain.stderr, rotated.stderr)
            self.assertTrue(within(rotated.mean, plain.mean, combined), model.name)
            self.assertTrue(within(plain.mean, model.expected_correlation(a, b), plain.stderr), model.name)


class TestSweep(unittest.TestCase):
    """Test cases for sweep."""

    def test_qm_analytic_endpoints(self):
        points = sweep(QuantumSingletModel(), [0.0, math.pi / 2, math.pi], 1, seed=1, method="analytic")
        means = [p.estimate.mean for p in points]
        self.assertEqual(means[0], -1.0)
        self.assertAlmostEqual(means[1], 0.0, delta=1e-15)
        self.assertAlmostEqual(means[2], 1.0, delta=1e-15)
        self.assertTrue(all(p.estimate.is_analytic for p in points))

    def test_qm_and_algebraic_follow_minus_cosine(self):
        for model in (QuantumSingletModel(), AlgebraicModel()):
            points = sweep(model, GRID_13, 100_000, seed=11)
            self.assertEqual(len(points), 13)
            for point in points:
                self.assertTrue(
                    within(point.estimate.mean, -math.cos(point.theta), point.estimate.stderr),
                    f"{model.name} at {point.theta_deg}",
                )
                self.assertAlmostEqual(point.reference, -math.cos(point.theta), delta=1e-12)

    def test_algebraic_imaginary_parts_average_to_zero(self):
        for point in sweep(AlgebraicModel(), GRID_13, 100_000, seed=12):
            self.assertTrue(within(point.estimate.im_mean, 0.0, point.estimate.im_stderr))

    def test_sign_model_follows_linear_law(self):
        for point in sweep(SignModel(), GRID_13, 100_000, seed=13):
            self.assertTrue(within(point.estimate.mean, lhv_correlation_closed_form(point.theta), point.estimate.stderr))
            self.assertAlmostEqual(point.expected, lhv_correlation_closed_form(point.theta), delta=1e-12)

    def test_photon_sweep_doubles_angles(self):
        points = sweep(QuantumSingletModel(), GRID_13, 100_000, seed=14, kind="photon")
        self.assertEqual(len(points), 13)
        for point in points:
            self.assertTrue(within(point.estimate.mean, -math.cos(2 * point.theta), point.estimate.stderr))
        # 45 degree analyzer difference
        self.assertTrue(within(points[3].estimate.mean, 0.0, points[3].estimate.stderr))

    def test_sweep_symmetry(self):
        """Test that E is even around 0 and odd around pi/2."""
        model = AlgebraicModel()
        grid = [-math.pi / 3, math.pi / 3, math.pi / 2 - 0.4, math.pi / 2 + 0.4]
        p = sweep(model, grid, 100_000, seed=15)
        combined = math.hypot(p[0].estimate.stderr, p[1].estimate.stderr)
        self.assertTrue(within(p[0].estimate.mean, p[1].estimate.mean, combined))
        combined = math.hypot(p[2].estimate.stderr, p[3].estimate.stderr)
        self.assertTrue(within(p[2].estimate.mean, -p[3].estimate.mean, combined))

    def test_points_use_distinct_streams(self):
        points = sweep(QuantumSingletModel(), [1.0, 1.0], 2000, seed=16)
        self.assertNotEqual(points[0].estimate.mean, points[1].estimate.mean)

    def test_empty_grid_and_bad_method(self):
        with self.assertRaises(EstimationError):
            sweep(QuantumSingletModel(), [], 10, seed=1)
        with self.assertRaises(EstimationError):
            sweep(QuantumSingletModel(), [0.0], 10, seed=1, method="guess")


class TestChsh(unittest.TestCase):
    """Test cases for chsh."""

    def setUp(self):
        """Set up test fixtures."""
        self.settings = ChshSettings.canonical()
        self.n = 200_000

    def test_qm_reaches_tsirelson_value(self):
        result = chsh(QuantumSingletModel(), self.settings, self.n, seed=21)
        self.assertTrue(within(abs(result.s_value), TSIRELSON_BOUND, result.s_stderr))
        self.assertLess(result.s_value, 0.0)
        self.assertTrue(result.violates_local_bound)

    def test_sign_model_reaches_local_bound(self):
        result = chsh(SignModel(), self.settings, self.n, seed=22)
        self.assertTrue(within(abs(result.s_value), 2.0, result.s_stderr))

    def test_algebraic_model_reaches_tsirelson_value(self):
        result = chsh(AlgebraicModel(), self.settings, self.n, seed=23)
        self.assertTrue(within(abs(result.s_value), TSIRELSON_BOUND, result.s_stderr))
        self.assertLess(result.s_stderr, 1e-12)

    def test_sign_model_respects_bound_at_other_settings(self):
        rng = np.random.default_rng(0)
        for _ in range(3):
            angles = rng.uniform(0, 180, size=4)
            result = chsh(SignModel(), ChshSettings.from_angles(angles), 50_000, seed=24)
            self.assertLessEqual(abs(result.s_value), 2.0 + 4.0 * result.s_stderr)

    def test_terms_use_independent_streams(self):
        result = chsh(QuantumSingletModel(), self.settings, 1000, seed=25)
        means = {e.mean for e in result.estimates}
        self.assertGreater(len(means), 1)


class TestAuditModel(unittest.TestCase):
    """Test cases for audit_model."""

    def test_qm_report(self):
        report = audit_model(QuantumSingletModel(), 20_000, seed=31)
        self.assertEqual(report.codomain, "real +/-1 pair")
        self.assertTrue(report.matched_setting_exact)
        self.assertEqual(report.matched_setting_failures, 0)
        self.assertTrue(within(abs(report.chsh.s_value), TSIRELSON_BOUND, report.chsh.s_stderr))
        self.assertTrue(report.locality_clean)
        self.assertTrue(report.locality_spacelike)
        self.assertIsNone(report.im_mean)
        self.assertIn("coincidence", report.station_record)

    def test_sign_report(self):
        report = audit_model(SignModel(), 20_000, seed=32)
        self.assertEqual(report.codomain, "real +/-1 pair")
        self.assertTrue(report.matched_setting_exact)
        self.assertTrue(within(abs(report.chsh.s_value), 2.0, report.chsh.s_stderr))
        self.assertTrue(report.marginals_balanced)
        self.assertEqual(report.station_record, "+/-1 outcome")

    def test_algebraic_report(self):
        report = audit_model(AlgebraicModel(), 20_000, seed=33)
        self.assertEqual(report.codomain, "complex scalar")
        self.assertTrue(report.matched_setting_exact)
        self.assertTrue(within(abs(report.chsh.s_value), TSIRELSON_BOUND, report.chsh.s_stderr))
        self.assertEqual(len(report.im_mean), 4)
        self.assertTrue(report.locality_clean)

    def test_rejects_small_runs(self):
        with self.assertRaises(EstimationError):
            audit_model(SignModel(), 9_999, seed=1)

    def test_report_fields_come_from_executed_trials(self):
        """Test that a model whose matched trials deviate is reported as such."""
        model = SignModel()

        def same_outcomes(instance, record_a, record_b):
            return PairOutcomeBatch(a_out=record_a.outcomes, b_out=record_a.outcomes)

        with patch.object(SignModel, "coincide", autospec=True, side_effect=same_outcomes):
            report = audit_model(model, 10_000, seed=34)
        self.assertFalse(report.matched_setting_exact)
        self.assertEqual(report.matched_setting_failures, report.matched_setting_trials)

    def test_table_and_dict(self):
        report = audit_model(SignModel(), 10_000, seed=35)
        lines = report.table()
        self.assertTrue(any(line.startswith("codomain") for line in lines))
        self.assertTrue(lines[-1].startswith("note:"))
        record = report.to_dict()
        self.assertEqual(record["locality"]["scope"], report.scope)
        self.assertNotIn("duration", record)


if __name__ == "__main__":
    unittest.main()
