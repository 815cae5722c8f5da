import cmath

import numpy as np
from django.test import SimpleTestCase

from classical.solvers import (
    classical_period,
    classical_rhs,
    classical_trajectory,
    integrate_classical,
    manley_rowe_drift,
    normalized_intensity,
    pendulum_energy,
    pendulum_evolve,
    pendulum_period,
    seed_for_pendulum,
)
from core.exceptions import DegenerateOrbitError, InvalidParameterError, SingularInputError
from core.models import FieldState


class FieldEquationTests(SimpleTestCase):
    def test_no_generated_fields_means_no_dynamics(self):
        d = classical_rhs(FieldState(1.3, 0.7 + 0.2j, 0, 0))
        self.assertEqual((d.omega1, d.omega2, d.e1, d.e2), (0, 0, 0, 0))

    def test_no_pumps_means_no_dynamics(self):
        d = classical_rhs(FieldState(0, 0, 0.5, 0.4j))
        self.assertEqual((d.omega1, d.omega2, d.e1, d.e2), (0, 0, 0, 0))

    def test_pump_two_derivative_for_diagonal_seed(self):
        eps = 1e-3
        seed = eps * cmath.exp(1j * np.pi / 4)
        d = classical_rhs(FieldState(1, 1, seed, seed))
        expected = -1j * eps ** 2 * cmath.exp(1j * np.pi / 2) / (1 + eps ** 2)
        self.assertAlmostEqual(abs(d.omega2 - expected), 0.0, places=15)

    def test_singular_denominator_rejected(self):
        with self.assertRaises(SingularInputError):
            classical_rhs(FieldState(0, 1, 0, 1))


class IntegrationTests(SimpleTestCase):
    def test_seedless_input_stays_constant(self):
        fs0 = FieldState(1, 0.5j, 0, 0)
        trajectory = integrate_classical(fs0, 10.0)
        for _, fs in trajectory:
            self.assertEqual(fs, fs0)

    def test_manley_rowe_conservation(self):
        fs0 = FieldState(1, 0.8 + 0.2j, 0.3j, 0.1)
        trajectory = integrate_classical(fs0, 50.0, tol=1e-10)
        self.assertLess(manley_rowe_drift(trajectory).max(), 1e-8)

    def test_tolerance_range_checked(self):
        with self.assertRaises(InvalidParameterError):
            integrate_classical(FieldState(1, 1, 0.1, 0.1), 1.0, tol=1e-2)

    def test_full_equations_follow_the_pendulum(self):
        fs0 = FieldState(1, 1, 0.1j, 0.1j)
        grid = np.linspace(0.0, 12.0, 241)
        trajectory = integrate_classical(fs0, grid[-1], tol=1e-12, xi_grid=grid)
        y_full = np.array([normalized_intensity(fs) for _, fs in trajectory])
        y_pendulum = pendulum_evolve(1 / 1.01, grid)
        self.assertLess(np.max(np.abs(y_full - y_pendulum)), 1e-6)

    def test_seed_phase_changes_peak_conversion(self):
        grid = np.linspace(0.0, 40.0, 4001)
        peaks = []
        for phase in (0.0, np.pi / 6):
            record = classical_trajectory(seed_for_pendulum(0.9, phase), grid, tol=1e-10)
            peaks.append(record.columns["I_e1"].max())
        self.assertGreater(abs(peaks[1] - peaks[0]) / peaks[0], 0.01)

    def test_trajectory_columns(self):
        record = classical_trajectory(FieldState(1, 1, 0.1j, 0.1j), [0.0, 0.5, 1.0])
        self.assertEqual(
            record.labels,
            ["xi", "I_omega1", "I_omega2", "I_e1", "I_e2", "m1", "m2", "m3", "m4"],
        )
        np.testing.assert_allclose(record.columns["m1"], 1.01, rtol=1e-9)


class PendulumTests(SimpleTestCase):
    def test_unstable_equilibrium(self):
        np.testing.assert_array_equal(pendulum_evolve(1.0, np.linspace(0, 10, 11)), 1.0)

    def test_potential_extremum_stays_put(self):
        np.testing.assert_array_equal(pendulum_evolve(0.5, np.linspace(0, 10, 11)), 0.5)

    def test_orbit_reaches_mirror_turning_point(self):
        grid = np.linspace(0.0, 20.0, 20001)
        y = pendulum_evolve(0.999, grid)
        self.assertAlmostEqual(y.min(), 0.001, delta=1e-6)
        self.assertLessEqual(y.max(), 0.999 + 1e-9)

    def test_energy_conserved(self):
        grid = np.linspace(0.0, 30.0, 3001)
        y = pendulum_evolve(0.8, grid)
        ydot = np.gradient(y, grid)
        energy = pendulum_energy(y[1:-1], ydot[1:-1])
        self.assertLess(np.max(np.abs(energy - pendulum_energy(0.8, 0.0))), 1e-4)

    def test_y0_outside_unit_interval_rejected(self):
        with self.assertRaises(InvalidParameterError):
            pendulum_evolve(1.5, [0.0, 1.0])

    def test_period_symmetric_about_half(self):
        self.assertAlmostEqual(pendulum_period(0.2) / pendulum_period(0.8), 1.0, places=12)

    def test_period_grows_towards_separatrix(self):
        self.assertGreater(pendulum_period(1 - 1e-6), pendulum_period(1 - 1e-3))
        self.assertGreater(pendulum_period(1 - 1e-3), pendulum_period(0.9))

    def test_degenerate_orbits(self):
        for y0 in (0.0, 0.5, 1.0):
            with self.assertRaises(DegenerateOrbitError):
                pendulum_period(y0)

    def test_period_matches_full_equations(self):
        expected = pendulum_period(0.9)
        measured = classical_period(seed_for_pendulum(0.9), xi_end=3.5 * expected)
        self.assertAlmostEqual(measured / expected, 1.0, delta=1e-4)

    def test_half_period_lands_on_mirror_point(self):
        period = pendulum_period(0.9)
        y = pendulum_evolve(0.9, [0.0, period / 2, period])
        self.assertAlmostEqual(y[1], 0.1, delta=1e-7)
        self.assertAlmostEqual(y[2], 0.9, delta=1e-7)
