import itertools

import numpy as np
from django.test import SimpleTestCase
from scipy.linalg import expm

from core.exceptions import InvalidParameterError, UndefinedStatisticsError
from fock.solvers import (
    SPECTRUM_CACHE_SIZE,
    SectorAmplitudes,
    _spectrum,
    basis_amplitudes,
    build_sector,
    deepest_conversion,
    evolve_sector,
    fock_series,
    generated_expectation,
    generated_variance,
    hamiltonian,
    intensity_difference_variance,
    mandel_q,
    phase_gate_truth_table,
    pump_expectation,
    pump_variance,
    sector_moments,
    sector_spectrum,
    transition_frequencies,
)


def product_basis_evolution(n1, n2, n3, n4, tau):
    """
    Evolve |n1, n2, n3, n4> with the four-mode Hamiltonian written on the
    product basis, restricted only by the two pump-plus-generated photon
    numbers. Returns {occupations: amplitude}.
    """
    total1, total2 = n1 + n3, n2 + n4
    states = [(b1, b2, total1 - b1, total2 - b2) for b1 in range(total1 + 1) for b2 in range(total2 + 1)]
    index = {state: i for i, state in enumerate(states)}
    h = np.zeros((len(states), len(states)))
    for (b1, b2, a1, a2), i in index.items():
        denominator = b1 + a1
        if denominator == 0:
            continue
        # b1^dag b2^dag a1 a2
        if a1 > 0 and a2 > 0:
            j = index[(b1 + 1, b2 + 1, a1 - 1, a2 - 1)]
            h[j, i] += np.sqrt(a1 * a2 * (b1 + 1) * (b2 + 1)) / denominator
        # a1^dag a2^dag b1 b2
        if b1 > 0 and b2 > 0:
            j = index[(b1 - 1, b2 - 1, a1 + 1, a2 + 1)]
            h[j, i] += np.sqrt(b1 * b2 * (a1 + 1) * (a2 + 1)) / denominator
    psi0 = np.zeros(len(states), dtype=complex)
    psi0[index[(n1, n2, n3, n4)]] = 1.0
    psi = expm(-1j * h * tau) @ psi0
    return {state: psi[i] for state, i in index.items()}


class SectorTests(SimpleTestCase):
    def test_single_photon_pair(self):
        s = build_sector(1, 1, 0, 0)
        self.assertEqual((s.dimension, s.d, s.n_min, s.n_max), (2, 1, 0, 1))

    def test_two_photon_couplings(self):
        s = build_sector(2, 2, 0, 0)
        self.assertEqual((s.dimension, s.d), (3, 2))
        np.testing.assert_allclose(hamiltonian(s).offdiag, [1.0, 1.0], rtol=1e-15)

    def test_missing_partner_freezes_sector(self):
        s = build_sector(1, 0, 0, 0)
        self.assertEqual(s.dimension, 1)
        self.assertTrue(s.frozen)

    def test_seeded_sector_range(self):
        s = build_sector(3, 2, 1, 4)
        self.assertEqual((s.n_min, s.n_max, s.dimension, s.d), (-1, 2, 4, 4))
        for n in s.transfers:
            self.assertTrue(all(k >= 0 for k in s.basis_state(n)))

    def test_negative_occupation_rejected(self):
        with self.assertRaises(InvalidParameterError):
            build_sector(-1, 0, 0, 0)

    def test_spectrum_comes_in_pairs(self):
        for occupations in [(5, 3, 0, 0), (7, 7, 2, 1), (12, 9, 0, 3), (4, 4, 4, 4)]:
            w, _ = sector_spectrum(build_sector(*occupations))
            self.assertLess(np.max(np.abs(w + w[::-1])), 1e-9)


class EvolutionTests(SimpleTestCase):
    def test_single_pair_rabi_oscillation(self):
        s = build_sector(1, 1, 0, 0)
        tau = np.linspace(0.0, 20.0, 401)
        for t, c in zip(tau, evolve_sector(s, basis_amplitudes(s), tau)):
            np.testing.assert_allclose(c.c, [np.cos(t), -1j * np.sin(t)], atol=1e-12)

    def test_pump_closed_forms(self):
        tau = np.linspace(0.0, 20.0, 2001)
        s1 = build_sector(1, 1, 0, 0)
        s2 = build_sector(2, 2, 0, 0)
        pump1 = fock_series(s1, basis_amplitudes(s1), tau).columns["pump_mean"]
        pump2 = fock_series(s2, basis_amplitudes(s2), tau).columns["pump_mean"]
        self.assertLess(np.max(np.abs(pump1 - np.cos(tau) ** 2)), 1e-10)
        self.assertLess(np.max(np.abs(pump2 - (1 + np.cos(np.sqrt(2) * tau)))), 1e-10)

    def test_full_conversion_points(self):
        s1 = build_sector(1, 1, 0, 0)
        s2 = build_sector(2, 2, 0, 0)
        c1 = evolve_sector(s1, basis_amplitudes(s1), [np.pi / 2])[0]
        c2 = evolve_sector(s2, basis_amplitudes(s2), [np.pi / np.sqrt(2)])[0]
        self.assertAlmostEqual(pump_expectation(s1, c1), 0.0, places=12)
        self.assertAlmostEqual(pump_expectation(s2, c2), 0.0, places=12)

    def test_zero_time_is_identity(self):
        s = build_sector(6, 4, 1, 2)
        c0 = SectorAmplitudes(np.linspace(1, 2, s.dimension) * np.exp(1j * np.arange(s.dimension)))
        c0 = SectorAmplitudes(c0.c / c0.norm)
        np.testing.assert_array_equal(evolve_sector(s, c0, [0.0])[0].c, c0.c)
        self.assertEqual(pump_expectation(s, c0), pump_expectation(s, evolve_sector(s, c0, [0.0])[0]))

    def test_unitarity_in_large_sector(self):
        s = build_sector(1999, 1999, 0, 0)
        self.assertEqual(s.dimension, 2000)
        for c in evolve_sector(s, basis_amplitudes(s), [0.0, 1.0, 10.0, 55.5, 100.0]):
            self.assertLess(abs(c.norm - 1.0), 1e-10)

    def test_unnormalized_start_rejected(self):
        s = build_sector(1, 1, 0, 0)
        with self.assertRaises(InvalidParameterError):
            evolve_sector(s, SectorAmplitudes(np.array([1.0, 1.0])), [1.0])

    def test_matches_product_basis_hamiltonian(self):
        tau = [0.3, 1.7, 4.2]
        for n1, n2 in itertools.product(range(7), repeat=2):
            s = build_sector(n1, n2, 0, 0)
            evolved = evolve_sector(s, basis_amplitudes(s), tau)
            for t, c in zip(tau, evolved):
                reference = product_basis_evolution(n1, n2, 0, 0, t)
                reduced = {s.basis_state(n): c.c[s.index(n)] for n in s.transfers}
                for state, amplitude in reference.items():
                    self.assertLess(abs(amplitude - reduced.get(state, 0.0)), 1e-9, msg=f"{state} at {t}")

    def test_seeded_sector_matches_product_basis(self):
        s = build_sector(3, 2, 1, 2)
        c = evolve_sector(s, basis_amplitudes(s), [2.5])[0]
        reference = product_basis_evolution(3, 2, 1, 2, 2.5)
        for n in s.transfers:
            self.assertLess(abs(reference[s.basis_state(n)] - c.c[s.index(n)]), 1e-9)


class ObservableTests(SimpleTestCase):
    def test_initial_expectations(self):
        s = build_sector(5, 3, 2, 0)
        c0 = basis_amplitudes(s)
        self.assertEqual(pump_expectation(s, c0), 5)
        self.assertEqual(generated_expectation(s, c0), 2)
        self.assertEqual(pump_variance(s, c0), 0.0)
        self.assertEqual(generated_variance(s, c0), 0.0)

    def test_mandel_q_limits(self):
        self.assertEqual(mandel_q(3.0, 3.0), 0.0)
        self.assertEqual(mandel_q(4.0, 0.0), -1.0)
        with self.assertRaises(UndefinedStatisticsError):
            mandel_q(0.0, 0.0)

    def test_generated_pairs_sub_poissonian_for_small_inputs(self):
        tau = np.linspace(0.05, 1.5, 30)
        for n in (1, 2):
            s = build_sector(n, n, 0, 0)
            q = fock_series(s, basis_amplitudes(s), tau).columns["q_gen"]
            self.assertTrue(np.all(q < 0), msg=f"n={n}")

    def test_fock_pump_starts_as_number_state(self):
        s = build_sector(3, 3, 0, 0)
        series = fock_series(s, basis_amplitudes(s), [0.0, 0.5])
        self.assertEqual(series.columns["q_pump"][0], -1.0)
        self.assertTrue(np.isnan(series.columns["q_gen"][0]))

    def test_difference_squeezing(self):
        tau = np.linspace(0.0, 10.0, 51)
        for occupations in [(4, 4, 0, 0), (3, 5, 2, 2), (6, 2, 2, 0)]:
            s = build_sector(*occupations)
            for c in evolve_sector(s, basis_amplitudes(s), tau):
                self.assertEqual(intensity_difference_variance(s, c), 0.0)
            series = fock_series(s, basis_amplitudes(s), tau)
            self.assertFalse(np.any(series.columns["var_diff"]))

    def test_pump_and_generated_sum_is_conserved(self):
        s = build_sector(8, 5, 0, 0)
        mean_n, var_n = sector_moments(s, basis_amplitudes(s), np.linspace(0, 30, 301))
        self.assertTrue(np.all(mean_n >= 0))
        self.assertTrue(np.all(mean_n <= s.n_max))
        self.assertTrue(np.all(var_n >= 0))


class SpectralTests(SimpleTestCase):
    def test_spectrum_cache_is_reused_and_bounded(self):
        s = build_sector(40, 40, 0, 0)
        self.assertIs(sector_spectrum(s)[1], sector_spectrum(s)[1])
        for n in range(1, 3 * SPECTRUM_CACHE_SIZE):
            sector_spectrum(build_sector(n, n + 1, 0, 0))
        self.assertLessEqual(_spectrum.cache_info().currsize, SPECTRUM_CACHE_SIZE)

    def test_one_frequency_only_for_one_or_two_photons(self):
        for n, count in ((1, 1), (2, 1)):
            s = build_sector(n, n, 0, 0)
            self.assertEqual(transition_frequencies(s, basis_amplitudes(s)).size, count)
        s3 = build_sector(3, 3, 0, 0)
        self.assertGreater(transition_frequencies(s3, basis_amplitudes(s3)).size, 1)

    def test_two_photon_frequency(self):
        s = build_sector(2, 2, 0, 0)
        np.testing.assert_allclose(transition_frequencies(s, basis_amplitudes(s)), [np.sqrt(2)], rtol=1e-9)

    def test_complete_conversion_recurs(self):
        for n, tau_max, steps in ((1, 5.0, 400000), (2, 5.0, 400000), (3, 2000.0, 400000), (4, 5000.0, 2000000), (5, 5000.0, 2000000)):
            s = build_sector(n, n, 0, 0)
            _, value = deepest_conversion(s, tau_max, steps=steps)
            self.assertLess(value, 1e-2, msg=f"n={n}")


class PhaseGateTests(SimpleTestCase):
    def test_truth_table(self):
        table = dict(phase_gate_truth_table())
        self.assertEqual(list(table), ["|0,0,0,0>", "|1,0,0,0>", "|0,1,0,0>", "|1,1,0,0>"])
        self.assertEqual(table["|0,0,0,0>"], 1)
        self.assertEqual(table["|1,0,0,0>"], 1)
        self.assertEqual(table["|0,1,0,0>"], 1)
        self.assertLess(abs(-1 - table["|1,1,0,0>"]), 1e-10)

    def test_single_photons_never_move(self):
        for tau in (0.3, 1.0, 7.0):
            table = dict(phase_gate_truth_table(tau))
            self.assertEqual(table["|1,0,0,0>"], 1)

    def test_full_revival_without_phase(self):
        table = dict(phase_gate_truth_table(2 * np.pi))
        self.assertLess(abs(1 - table["|1,1,0,0>"]), 1e-10)
