import numpy as np
from django.test import SimpleTestCase

from adiabatic.solvers import (
    BRANCH_PREFACTOR,
    adiabatic_branch,
    build_five_level,
    eigenvalues,
    hermiticity_defect,
    lambda0,
    lambda0_ladder,
)
from core.exceptions import SingularInputError
from core.models import FieldState, PhysicalParams


class FiveLevelMatrixTests(SimpleTestCase):
    def test_zero_fields_give_detuned_diagonal(self):
        m = build_five_level(FieldState(0, 0, 0, 0), PhysicalParams(1, 10))
        np.testing.assert_array_equal(m.entries, np.diag([0, 0, -10, 10, 0]))

    def test_single_pump_sparsity(self):
        m = build_five_level(FieldState(0, 1, 0, 0), PhysicalParams(1, 10)).entries
        self.assertEqual(m[0, 2], 1)
        self.assertEqual(m[0, 3], 1)
        off = m - np.diag(np.diag(m))
        off[0, 2] = off[0, 3] = off[2, 0] = off[3, 0] = 0
        self.assertFalse(np.any(off))
        w = np.sort(eigenvalues(build_five_level(FieldState(0, 1, 0, 0), PhysicalParams(1, 10))).real)
        self.assertEqual(int(np.sum(np.abs(w) < 1e-12)), 3)

    def test_sign_flip_on_level_four(self):
        m = build_five_level(FieldState(1, 1, 0.3j, 0.2 + 0.1j), PhysicalParams(1, 5)).entries
        self.assertEqual(m[3, 1], -(0.2 + 0.1j))
        self.assertEqual(m[1, 3], -(0.2 - 0.1j))
        self.assertEqual(m[2, 1], 0.2 + 0.1j)
        for i, j in [(0, 1), (2, 3), (2, 4), (3, 4)]:
            self.assertEqual(m[i, j], 0)
            self.assertEqual(m[j, i], 0)

    def test_hermitian_without_decay(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            z = rng.normal(size=4) + 1j * rng.normal(size=4)
            m = build_five_level(FieldState(*z), PhysicalParams(1, 2.5))
            self.assertEqual(hermiticity_defect(m), 0.0)
            self.assertLess(np.max(np.abs(eigenvalues(m).imag)), 1e-10)

    def test_hermiticity_defect_tracks_decay(self):
        m = build_five_level(FieldState(1, 1, 0.1, 0.1), PhysicalParams(1, 10, gamma1=0.3, gamma2=0.7))
        self.assertAlmostEqual(hermiticity_defect(m), 1.4, places=14)


class AdiabaticBranchTests(SimpleTestCase):
    def test_decoupled_level_gives_zero(self):
        m = build_five_level(FieldState(0, 0, 0, 0), PhysicalParams(1, 3))
        self.assertEqual(adiabatic_branch(m), 0)

    def test_ac_stark_shifts_cancel(self):
        m = build_five_level(FieldState(0, 0.01, 0, 0), PhysicalParams(1, 1))
        self.assertLess(abs(adiabatic_branch(m)), 1e-12)

    def test_branch_matches_closed_form(self):
        fs = FieldState(1, 1, 0.1, 0.1)
        p = PhysicalParams(1, 100)
        exact = adiabatic_branch(build_five_level(fs, p))
        self.assertAlmostEqual(exact.imag, 0.0, places=14)
        self.assertAlmostEqual(exact.real / (BRANCH_PREFACTOR * lambda0(fs, p)), 1.0, delta=1e-3)
        self.assertAlmostEqual(exact.real, 3.9596e-4, delta=1e-8)
        self.assertAlmostEqual(lambda0(fs, p), 1.9802e-4, delta=1e-8)

    def test_error_ladder_scales_quadratically(self):
        rows, slope = lambda0_ladder(FieldState(1, 1, 0.1, 0.1), PhysicalParams(1, 1), [0.025, 0.05, 0.1])
        self.assertEqual(len(rows), 3)
        self.assertAlmostEqual(slope, 2.0, delta=0.3)
        self.assertTrue(all(r[3] < 0.1 for r in rows))

    def test_losses_fade_with_detuning(self):
        fs = FieldState(1, 1, 0.1, 0.1)
        ratios = []
        for delta in (100.0, 1000.0, 10000.0):
            value = adiabatic_branch(build_five_level(fs, PhysicalParams(1, delta, gamma1=1, gamma2=1)))
            ratios.append(abs(value.imag) / abs(value))
        self.assertGreater(ratios[0], ratios[1])
        self.assertGreater(ratios[1], ratios[2])
        self.assertLess(ratios[2], 0.05)


class Lambda0Tests(SimpleTestCase):
    def test_vanishes_without_generated_field(self):
        p = PhysicalParams(1, 100)
        self.assertEqual(lambda0(FieldState(1, 1, 0, 0.1), p), 0)
        self.assertEqual(lambda0(FieldState(1, 1, 0.1, 0), p), 0)

    def test_hand_value(self):
        value = lambda0(FieldState(1, 1, 0.1, 0.1), PhysicalParams(1, 100))
        self.assertAlmostEqual(value, 0.02 / (100 * 1.01), places=15)
        self.assertAlmostEqual(value, 1.9802e-4, delta=1e-8)

    def test_quadrature_phase_gives_zero(self):
        self.assertAlmostEqual(lambda0(FieldState(1, 1, 0.1j, 0.1), PhysicalParams(1, 100)), 0.0, places=15)

    def test_rejects_missing_eit_denominator(self):
        with self.assertRaises(SingularInputError):
            lambda0(FieldState(0, 1, 0, 1), PhysicalParams(1, 100))
