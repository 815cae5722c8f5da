import inspect

import numpy as np
from django.test import SimpleTestCase
from scipy.integrate import solve_ivp

from core.exceptions import CorrelationUnderflowError, DomainError, InvalidParameterError
from meanfield import solvers
from meanfield.solvers import (
    MeanFieldState,
    QuarticPotential,
    conversion_distance,
    efficiency,
    integrate_full_meanfield,
    integrate_meanfield,
    meanfield_constant,
    meanfield_full_rhs,
    meanfield_period,
    meanfield_scan,
    pendulum_energy,
    potential,
    quartic_turning_points,
    reduced_ode_rhs,
)


class ClosedFormTests(SimpleTestCase):
    def test_turning_points(self):
        self.assertAlmostEqual(quartic_turning_points(2)[0], 1.0, places=14)
        b_min, b0, b0_plus1 = quartic_turning_points(100)
        self.assertAlmostEqual(b_min, 9.5125, delta=1e-3)
        self.assertEqual((b0, b0_plus1), (100.0, 101.0))

    def test_inner_turning_point_scales_as_inverse_root(self):
        b0 = 1e4
        ratio = quartic_turning_points(b0)[0] / b0
        self.assertAlmostEqual(ratio * np.sqrt(b0), 1.0, delta=0.01)
        self.assertAlmostEqual(efficiency(b0) / (1 - 1 / np.sqrt(b0)), 1.0, delta=0.01)

    def test_efficiency(self):
        self.assertEqual(efficiency(2), 0.5)
        self.assertAlmostEqual(efficiency(100), 0.9049, delta=1e-4)
        self.assertGreater(efficiency(1e6), 0.9989)

    def test_potential_vanishes_at_roots(self):
        v = QuarticPotential(37.0)
        for root in v.roots:
            self.assertLess(abs(v(root)), 1e-9)
        self.assertEqual(potential(37.0, 37.0), 0.0)

    def test_nonpositive_b0_rejected(self):
        with self.assertRaises(InvalidParameterError):
            quartic_turning_points(0)


class ReducedEquationTests(SimpleTestCase):
    def test_hand_value(self):
        self.assertAlmostEqual(reduced_ode_rhs(5, 10), 0.2 * np.sqrt(600), places=12)

    def test_roots_are_at_rest(self):
        self.assertEqual(reduced_ode_rhs(10, 10), 0.0)
        b_min = quartic_turning_points(10)[0]
        self.assertLess(reduced_ode_rhs(b_min, 10), 1e-6)

    def test_forbidden_region(self):
        with self.assertRaises(DomainError):
            reduced_ode_rhs(1.0, 10)

    def test_squared_rate_matches_potential(self):
        for b in (3.0, 7.5, 9.9):
            self.assertAlmostEqual(reduced_ode_rhs(b, 10) ** 2, -2 * potential(b, 10), places=9)


class ConversionDistanceTests(SimpleTestCase):
    def test_increases_with_b0(self):
        z = [conversion_distance(b0) for b0 in (10, 100, 1000)]
        self.assertLess(z[0], z[1])
        self.assertLess(z[1], z[2])

    def test_logarithmic_growth(self):
        b0 = np.array([10.0, 30.0, 100.0, 300.0, 1000.0])
        z = np.array([conversion_distance(b) for b in b0])
        slope, intercept = np.polyfit(np.log(b0), z, 1)
        fitted = intercept + slope * np.log(b0)
        r_squared = 1 - np.sum((z - fitted) ** 2) / np.sum((z - z.mean()) ** 2)
        self.assertGreater(slope, 0)
        self.assertGreater(r_squared, 0.98)

    def test_matches_integrated_orbit(self):
        xi_min, period = meanfield_period(50.0)
        z = conversion_distance(50.0)
        self.assertAlmostEqual(xi_min / z, 1.0, delta=1e-4)
        self.assertAlmostEqual(period / (2 * z), 1.0, delta=1e-4)

    def test_period_leaves_module_functions_untouched(self):
        self.assertEqual(meanfield_period(30.0), meanfield_period(30.0))
        for name, f in inspect.getmembers(solvers, inspect.isfunction):
            self.assertFalse(hasattr(f, "direction"), msg=name)

    def test_scan_rows(self):
        rows = meanfield_scan([10, 100])
        self.assertEqual([r[0] for r in rows], [10.0, 100.0])
        self.assertEqual(rows[1][2], efficiency(100))
        with self.assertRaises(InvalidParameterError):
            meanfield_scan([100, 10])


class PendulumOrbitTests(SimpleTestCase):
    b0 = 50.0

    def test_initial_conditions(self):
        record = integrate_meanfield(self.b0, 1.0, [0.0, 0.5, 1.0])
        self.assertEqual(record.columns["b"][0], self.b0)
        self.assertEqual(record.columns["b_dot"][0], 0.0)
        self.assertLess(record.columns["b"][1], self.b0)

    def test_orbit_reaches_inner_turning_point(self):
        z = conversion_distance(self.b0)
        grid = np.linspace(0.0, 2 * z, 40001)
        b = integrate_meanfield(self.b0, grid[-1], grid).columns["b"]
        b_min = quartic_turning_points(self.b0)[0]
        self.assertAlmostEqual(b.min(), b_min, delta=1e-6 * self.b0)
        self.assertLessEqual(b.max(), self.b0 * (1 + 1e-9))

    def test_energy_conserved(self):
        z = conversion_distance(self.b0)
        grid = np.linspace(0.0, 2 * z, 2001)
        record = integrate_meanfield(self.b0, grid[-1], grid)
        energy = pendulum_energy(record.columns["b"], record.columns["b_dot"], self.b0)
        v_min = np.min(potential(np.linspace(quartic_turning_points(self.b0)[0], self.b0, 2001), self.b0))
        self.assertLess(np.max(np.abs(energy)), 1e-8 * abs(v_min))

    def test_periodic(self):
        _, period = meanfield_period(self.b0)
        grid = np.linspace(0.0, period, 201)
        shifted = grid + 4 * period
        record = integrate_meanfield(self.b0, shifted[-1], np.concatenate([grid, shifted]))
        b = record.columns["b"]
        self.assertLess(np.max(np.abs(b[:201] - b[201:])), 1e-6 * self.b0)

    def test_small_b0_rejected(self):
        with self.assertRaises(InvalidParameterError):
            integrate_meanfield(0.5, 1.0)


class FullEquationTests(SimpleTestCase):
    def test_no_correlations_no_dynamics(self):
        s = MeanFieldState(b=10.0, b12=0.0, a12=0.0, phi_b=0.3, phi_a=1.1, d=10.0)
        np.testing.assert_array_equal(meanfield_full_rhs(s), np.zeros(5))

    def test_underflowing_correlation_rejected(self):
        s = MeanFieldState(b=10.0, b12=10.0, a12=0.0, phi_b=0.0, phi_a=-np.pi / 2, d=10.0)
        with self.assertRaises(CorrelationUnderflowError):
            meanfield_full_rhs(s)

    def test_pump_equation(self):
        s = MeanFieldState(b=6.0, b12=4.0, a12=2.0, phi_b=0.2, phi_a=1.0, d=10.0)
        db = meanfield_full_rhs(s)[0]
        self.assertAlmostEqual(db, 2 / 10 * 4 * 2 * np.sin(0.8), places=14)

    def test_constant_of_motion(self):
        s0 = MeanFieldState(b=8.0, b12=7.0, a12=1.5, phi_b=0.1, phi_a=-1.0, d=10.0)

        def rhs(_xi, v):
            return meanfield_full_rhs(MeanFieldState(*v, d=s0.d))

        sol = solve_ivp(rhs, (0.0, 0.3), s0.as_vector(), method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)
        for xi in np.linspace(0.0, 0.3, 31):
            s = MeanFieldState(*sol.sol(xi), d=s0.d)
            self.assertAlmostEqual(meanfield_constant(s), meanfield_constant(s0), delta=1e-9)

    def test_reduces_to_single_equation(self):
        b0 = 50.0
        z = conversion_distance(b0)
        grid = np.linspace(0.0, 2 * z, 401)
        full = integrate_full_meanfield(b0, grid, delta=0.0).columns["b"]
        reduced = integrate_meanfield(b0, grid[-1], grid).columns["b"]
        self.assertLess(np.max(np.abs(full - reduced)) / b0, 1e-6)

    def test_vacuum_seed_offset_does_not_matter(self):
        b0 = 50.0
        grid = np.linspace(0.0, 2 * conversion_distance(b0), 401)
        coarse = integrate_full_meanfield(b0, grid, delta=1e-8).columns["b"]
        fine = integrate_full_meanfield(b0, grid, delta=1e-9).columns["b"]
        self.assertLess(np.max(np.abs(coarse - fine)) / b0, 1e-4)

    def test_phases_locked_in_quadrature(self):
        b0 = 50.0
        z = conversion_distance(b0)
        grid = np.linspace(0.05 * z, 1.95 * z, 200)
        record = integrate_full_meanfield(b0, np.concatenate([[0.0], grid]), delta=0.0)
        columns = record.columns
        self.assertLess(np.max(np.abs(columns["constant"])), 1e-9 * b0 ** 2)
        dphi = columns["dphi"][1:]
        self.assertLess(np.max(np.abs(np.cos(dphi))), 1e-6)
        descending = grid < 0.95 * z
        ascending = grid > 1.05 * z
        self.assertTrue(np.all(np.sin(dphi[descending]) < 0))
        self.assertTrue(np.all(np.sin(dphi[ascending]) > 0))
