import cmath

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from core.exceptions import ConfigurationError, InvalidParameterError, SimulationError
from core.models import FieldState, PhysicalParams, TrajectoryRecord
from core.utils import (
    CompensatedSum,
    dimensionless_rate,
    manley_rowe,
    shifted_variance,
    tau_from_time,
    xi_from_zeta,
    zeta_from_xi,
)


class ManleyRoweTests(SimpleTestCase):
    def test_vacuum_generated_fields(self):
        self.assertEqual(manley_rowe(FieldState(1, 1, 0, 0)), (1.0, 1.0, 0.0, 0.0))

    def test_vacuum_pumps(self):
        self.assertEqual(manley_rowe(FieldState(0, 0, 2, 2)), (4.0, 4.0, 0.0, 0.0))

    def test_quadrature_seed_has_no_m4(self):
        m1, m2, m3, m4 = manley_rowe(FieldState(1, 1, 0.1j, 0.1))
        self.assertAlmostEqual(m1, 1.01, places=14)
        self.assertAlmostEqual(m2, 1.01, places=14)
        self.assertEqual(m3, 0.0)
        self.assertAlmostEqual(m4, 0.0, places=15)

    def test_common_phase_on_omega1_and_e1_leaves_invariants(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            z = rng.normal(size=4) + 1j * rng.normal(size=4)
            phase = cmath.exp(1j * rng.uniform(0, 2 * np.pi))
            before = manley_rowe(FieldState(*z))
            after = manley_rowe(FieldState(z[0] * phase, z[1], z[2] * phase, z[3]))
            np.testing.assert_allclose(after, before, rtol=1e-12, atol=1e-12)

    def test_sign_pattern_on_random_inputs(self):
        rng = np.random.default_rng(11)
        signs = set()
        for _ in range(50):
            z = rng.normal(size=4) + 1j * rng.normal(size=4)
            m1, m2, m3, _ = manley_rowe(FieldState(*z))
            self.assertGreaterEqual(m1, 0)
            self.assertGreaterEqual(m2, 0)
            signs.add(np.sign(m3))
        self.assertEqual(signs, {-1.0, 1.0})


class ScalingTests(SimpleTestCase):
    def test_dimensionless_rate(self):
        self.assertEqual(dimensionless_rate(PhysicalParams(1, 1)), 1)
        self.assertEqual(dimensionless_rate(PhysicalParams(2, 4)), 0.5)
        self.assertEqual(dimensionless_rate(PhysicalParams(1, -1)), -1)

    def test_zero_detuning_rejected(self):
        with self.assertRaises(InvalidParameterError):
            PhysicalParams(1, 0)

    def test_invalid_params_are_configuration_errors(self):
        with self.assertRaises(ConfigurationError):
            PhysicalParams(-1, 1)
        with self.assertRaises(ConfigurationError):
            PhysicalParams(1, 1, gamma2=-0.1)

    def test_xi_is_proportional_to_zeta(self):
        p = PhysicalParams(3.0, 1.5)
        np.testing.assert_allclose(xi_from_zeta(p, [0.0, 1.0, 2.0]), [0.0, 2.0, 4.0])
        np.testing.assert_allclose(zeta_from_xi(p, xi_from_zeta(p, 0.7)), 0.7)

    def test_tau_uses_speed_of_light(self):
        p = PhysicalParams(1.0, 1.0)
        self.assertAlmostEqual(float(tau_from_time(p, 1.0)), 299792458.0)


class FieldStateTests(SimpleTestCase):
    def test_vector_layout(self):
        fs = FieldState(1 + 2j, 3, -1j, 0.5)
        v = fs.as_vector()
        np.testing.assert_array_equal(v, [1, 3, 0, 0.5, 2, 0, -1, 0])
        self.assertEqual(FieldState.from_vector(v), fs)

    def test_non_finite_amplitude_rejected(self):
        with self.assertRaises(InvalidParameterError):
            FieldState(float("nan"), 1, 0, 0)


class TrajectoryRecordTests(SimpleTestCase):
    def test_rows_follow_column_order(self):
        record = TrajectoryRecord("xi", [0.0, 1.0], {"b": [2.0, 3.0], "a": [4.0, 5.0]})
        self.assertEqual(record.labels, ["xi", "b", "a"])
        self.assertEqual(list(record.rows()), [(0.0, 2.0, 4.0), (1.0, 3.0, 5.0)])

    def test_coordinates_must_increase(self):
        with self.assertRaises(InvalidParameterError):
            TrajectoryRecord("xi", [0.0, 0.0], {})

    def test_column_length_checked(self):
        with self.assertRaises(InvalidParameterError):
            TrajectoryRecord("xi", [0.0, 1.0], {"b": [1.0]})


class SummationTests(SimpleTestCase):
    def test_compensated_sum_beats_naive_sum(self):
        acc = CompensatedSum()
        naive = 0.0
        acc.add(1.0)
        naive += 1.0
        for _ in range(10000):
            acc.add(1e-16)
            naive += 1e-16
        self.assertEqual(naive, 1.0)
        self.assertAlmostEqual(float(acc.total), 1.0 + 1e-12, delta=1e-15)

    def test_constant_observable_has_exact_zero_variance(self):
        weights = [0.1, 0.3, 0.6 + 1e-13]
        self.assertEqual(shifted_variance(weights, [2, 2, 2]), 0.0)

    def test_variance_of_two_point_distribution(self):
        self.assertAlmostEqual(shifted_variance([0.5, 0.5], [0, 2]), 1.0)


class ErrorTests(SimpleTestCase):
    def test_configuration_error_collects_issues(self):
        err = ConfigurationError([(2, "bad n"), (None, "missing scenario")])
        self.assertEqual(err.exit_status, 1)
        self.assertIn("line 2: bad n", str(err))
        self.assertIn("missing scenario", str(err))

    def test_solver_errors_exit_with_two(self):
        self.assertEqual(SimulationError("x", "y").exit_status, 2)


class SettingsTests(SimpleTestCase):
    def test_no_persistence_layer(self):
        self.assertEqual(settings.DATABASES, {})
        self.assertNotIn("django.contrib.auth", settings.INSTALLED_APPS)
        self.assertNotIn("django.contrib.contenttypes", settings.INSTALLED_APPS)
