import unittest

import numpy as np
from numpy import testing as npt

from chronolab import floquet_observables
from chronolab import random_streams
from chronolab import time_lattice


def _circular_distance(a, b, zone):
    d = np.mod(a - b, zone)
    return np.minimum(d, zone - d)


class TightBindingRingTest(unittest.TestCase):

    def test_clean_ring_follows_cosine_dispersion(self):
        energies, _ = time_lattice.tb_ring_eigensystem(
            time_lattice.clean_ring(7, 1.3))
        expected = np.sort(-1.3 * np.cos(2 * np.pi * np.arange(7) / 7.0))
        npt.assert_allclose(expected, energies, atol=1e-12)

    def test_two_site_ring(self):
        ring = time_lattice.TightBindingRing(hoppings=[0.8, 0.8],
                                             energies=[0.3, -0.3])
        energies, _ = time_lattice.tb_ring_eigensystem(ring)
        root = np.sqrt(0.3**2 + 0.8**2)
        npt.assert_allclose([-root, root], energies, atol=1e-12)

    def test_mismatched_hoppings(self):
        ring = time_lattice.TightBindingRing(hoppings=[1.0, 1.0],
                                             energies=[0.0, 0.0, 0.0])
        with self.assertRaises(time_lattice.ParameterError):
            time_lattice.tb_ring_eigensystem(ring)

    def test_single_site(self):
        with self.assertRaises(time_lattice.ParameterError):
            time_lattice.tb_ring_eigensystem(
                time_lattice.TightBindingRing(hoppings=[1.0], energies=[0.0]))


class LloydLocalizationTest(unittest.TestCase):

    def test_energies_are_keyed_by_site(self):
        npt.assert_array_equal(
            time_lattice.lorentzian_energies(5, 10, 1.0)[:4],
            time_lattice.lorentzian_energies(5, 4, 1.0))

    def test_transfer_matrix_matches_exact_length(self):
        u = random_streams.generator(3, 'test.chain').uniform(size=20000)
        chain = np.tan(np.pi * (u - 0.5))
        measured = time_lattice.transfer_matrix_length(1.0, chain, [0.0])[0]
        exact = time_lattice.lloyd_exact_length(1.0, 1.0, 0.0)
        self.assertAlmostEqual(1.0, measured / exact, delta=0.1)

    def test_exact_length_at_band_center(self):
        self.assertAlmostEqual(0.5 / np.arccosh(np.sqrt(2.0)),
                               time_lattice.lloyd_exact_length(1.0, 1.0, 0.0))

    def test_eigenstate_fits_agree_with_transfer_matrix(self):
        deviations = []
        for seed in range(20):
            result = time_lattice.lloyd_localization(200, 1.0, 1.0, seed)
            self.assertTrue(result.window)
            deviations.append(
                abs(result.fit_length - result.transfer_length) /
                result.transfer_length)
        self.assertLessEqual(np.median(deviations), 0.15)

    def test_time_length_scales_with_period(self):
        result = time_lattice.lloyd_localization(100, 1.0, 1.0, 4, period=2.5)
        self.assertAlmostEqual(2.5 * result.fit_length, result.time_length)

    def test_clean_ring_is_delocalized(self):
        result = time_lattice.lloyd_localization(60, 1.0, 0.0, 0)
        self.assertEqual([], result.window)
        self.assertTrue(np.isnan(result.fit_length))
        for n in range(60):
            self.assertGreaterEqual(
                floquet_observables.participation_ratio(result.vectors[:, n]),
                30.0)

    def test_negative_width(self):
        with self.assertRaises(time_lattice.ParameterError):
            time_lattice.lloyd_localization(20, 1.0, -1.0, 0)

    def test_time_profile_repeats_after_ring_length(self):
        result = time_lattice.lloyd_localization(40, 1.0, 1.0, 2, period=2.0)
        profile = time_lattice.time_profile(result.ring, result.vectors[:, 5],
                                            repeats=3)
        self.assertEqual(80.0, profile.recurrence)
        npt.assert_array_equal(profile.values[:40], profile.values[40:80])
        npt.assert_array_equal(profile.values[:40], profile.values[80:])
        self.assertEqual(2.0, profile.times[1])


class EffectivePotentialTest(unittest.TestCase):

    def setUp(self):
        self.spec = time_lattice.DisorderedRingSpec(V0=3.0,
                                                    k0=20,
                                                    K=60,
                                                    omega=1.0,
                                                    seed=7)

    def test_standard_deviation_equals_amplitude(self):
        potential = time_lattice.effective_potential(self.spec)
        self.assertAlmostEqual(3.0, np.std(potential.values), places=10)
        self.assertAlmostEqual(0.0, np.mean(potential.values), places=10)

    def test_correlation_length(self):
        potential = time_lattice.effective_potential(self.spec)
        self.assertAlmostEqual(1.0,
                               potential.correlation_length /
                               (np.sqrt(2.0) / 20),
                               delta=0.2)
        self.assertFalse(potential.truncated)

    def test_few_harmonics_are_flagged(self):
        potential = time_lattice.effective_potential(
            self.spec._replace(K=30))
        self.assertTrue(potential.truncated)

    def test_same_seed_is_reproducible(self):
        npt.assert_array_equal(
            time_lattice.effective_potential(self.spec).values,
            time_lattice.effective_potential(self.spec).values)

    def test_phases_do_not_depend_on_harmonic_count(self):
        short = time_lattice.effective_potential(self.spec)
        long = time_lattice.effective_potential(self.spec._replace(K=80))
        npt.assert_allclose(np.angle(short.harmonics),
                            np.angle(long.harmonics[:60]),
                            atol=1e-12)

    def test_drive_harmonics_reproduce_potential_harmonics(self):
        potential = time_lattice.effective_potential(self.spec)
        k = np.arange(1, 61)
        g = 1j * (-1.0)**k / (np.pi * k)
        npt.assert_allclose(potential.harmonics,
                            g * potential.drive_harmonics,
                            atol=1e-14)

    def test_different_seeds_are_decorrelated(self):
        spec = time_lattice.DisorderedRingSpec(V0=1.0,
                                               k0=100,
                                               K=400,
                                               omega=1.0,
                                               seed=1)
        first = time_lattice.effective_potential(spec)
        second = time_lattice.effective_potential(spec._replace(seed=2))
        self.assertLess(
            time_lattice.cross_correlation_peak(first.values, second.values),
            0.3)

    def test_coarse_grid(self):
        with self.assertRaises(time_lattice.TruncationError):
            time_lattice.effective_potential(self.spec, points=100)


class RingAndersonTest(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.spec = time_lattice.DisorderedRingSpec(V0=1000.0,
                                                   k0=20,
                                                   K=60,
                                                   omega=2.0,
                                                   seed=0)
        cls.result = time_lattice.ring_anderson(cls.spec, 240)

    def test_states_below_disorder_strength_are_localized(self):
        self.assertGreaterEqual(
            time_lattice.localized_fraction(self.result, 1000.0), 0.8)

    def test_localization_persists_above_disorder_strength(self):
        self.assertGreaterEqual(
            time_lattice.localized_fraction(self.result, 1500.0), 0.8)

    def test_lab_frame_profile_is_periodic(self):
        profile = time_lattice.ring_time_profile(self.result,
                                                 0,
                                                 theta0=1.0,
                                                 samples_per_period=64,
                                                 periods=2)
        self.assertAlmostEqual(np.pi, profile.recurrence)
        npt.assert_array_equal(profile.values[:64], profile.values[64:])

    def test_free_rotor_is_extended(self):
        result = time_lattice.ring_anderson(self.spec, 240, V0=0.0)
        npt.assert_allclose(0.5 * np.sort(np.arange(-240, 241)**2.0),
                            result.energies,
                            atol=1e-9)
        npt.assert_allclose(time_lattice.state_density(result, 0),
                            1.0 / (2 * np.pi),
                            rtol=1e-10)
        self.assertFalse(result.fits[0].accepted)

    def test_small_basis(self):
        with self.assertRaises(time_lattice.TruncationError):
            time_lattice.ring_anderson(self.spec, 200)


class SecularBandsTest(unittest.TestCase):

    def test_first_gap_equals_potential_amplitude(self):
        bands = time_lattice.secular_bands(
            time_lattice.PendulumSpec(mass=1.0, V0=0.2, s=4), bands=4)
        self.assertAlmostEqual(0.2,
                               time_lattice.band_gaps(bands)[0],
                               delta=0.02)

    def test_free_bands_are_gapless(self):
        bands = time_lattice.secular_bands(
            time_lattice.PendulumSpec(mass=1.0, V0=0.0, s=4), bands=4)
        npt.assert_allclose(np.zeros(3),
                            time_lattice.band_gaps(bands),
                            atol=1e-12)

    def test_bands_are_periodic_in_quasi_momentum(self):
        bands = time_lattice.secular_bands(time_lattice.PendulumSpec(mass=0.5,
                                                                     V0=1.0,
                                                                     s=4),
                                           quasi_momenta=[-1.0, 3.0],
                                           bands=5)
        npt.assert_allclose(bands.energies[0], bands.energies[1], atol=1e-10)

    def test_non_positive_mass(self):
        with self.assertRaises(time_lattice.ParameterError):
            time_lattice.secular_bands(
                time_lattice.PendulumSpec(mass=0.0, V0=1.0, s=2))


class PhaseCrystalTest(unittest.TestCase):

    def test_commutes_with_discrete_rotation(self):
        spec = time_lattice.PhaseCrystalSpec(s=3, mu=0.01, lam=0.05, n_max=60)
        g = time_lattice.phase_crystal_matrix(spec)
        rotation = time_lattice.translation_operator(spec)
        self.assertLessEqual(
            np.max(np.abs(g.dot(rotation) - rotation.dot(g))), 1e-10)

    def test_undriven_levels(self):
        spec = time_lattice.PhaseCrystalSpec(s=4, mu=0.0, lam=0.02, n_max=80)
        spectrum = time_lattice.rwa_phase_crystal(spec)
        n = np.arange(81)
        npt.assert_allclose(np.sort(0.25 * (2 * 0.02 * (n + 1) - 1)**2),
                            np.sort(np.concatenate(spectrum.sectors)),
                            atol=1e-12)

    def test_lowest_band_is_separated(self):
        spec = time_lattice.PhaseCrystalSpec(s=10,
                                             mu=3.2e-3,
                                             lam=1.0 / 205,
                                             n_max=400)
        spectrum = time_lattice.rwa_phase_crystal(spec)
        lowest = time_lattice.crystal_band(spectrum, 0)
        second = time_lattice.crystal_band(spectrum, 1)
        self.assertEqual(10, len(lowest))
        self.assertLess(np.ptp(lowest), np.min(second) - np.max(lowest))
        self.assertFalse(any(flags[0] for flags in spectrum.flagged))

    def test_invalid_planck_constant(self):
        with self.assertRaises(time_lattice.ParameterError):
            time_lattice.phase_crystal_matrix(
                time_lattice.PhaseCrystalSpec(s=2, mu=0.1, lam=0.0, n_max=10))


class BouncerTest(unittest.TestCase):

    def test_ground_level(self):
        self.assertAlmostEqual(2.338107410 / 2**(1.0 / 3),
                               time_lattice.bouncer_energies(3)[0],
                               places=8)

    def test_mean_height_is_two_thirds_of_energy(self):
        basis = time_lattice.bouncer_basis(
            time_lattice.BouncerSpec(lam=0.0, omega=1.1))
        npt.assert_allclose(2.0 / 3 * basis.energies[:10],
                            np.diag(basis.position)[:10],
                            rtol=1e-6)

    def test_undriven_quasi_energies(self):
        spec = time_lattice.BouncerSpec(lam=0.0, omega=1.1)
        basis = time_lattice.bouncer_basis(spec)
        monodromy, period = time_lattice.bouncer_monodromy(spec, basis)
        spectrum = floquet_observables.quasi_spectrum(monodromy, period)
        expected = np.mod(basis.energies, 1.1)
        for phase in spectrum.phases:
            self.assertLessEqual(
                np.min(_circular_distance(expected, phase, 1.1)), 1e-8)

    def test_period_doubling_packets(self):
        result = time_lattice.bouncer_floquet(
            time_lattice.BouncerSpec(lam=0.06, omega=1.1, s=2))
        self.assertEqual(2, len(result.packets))
        self.assertGreater(result.splitting, 0.0)
        self.assertLess(result.splitting, 0.05 * 1.1)
        self.assertGreaterEqual(result.exchange_overlap, 0.9)
        self.assertAlmostEqual(0.0,
                               abs(np.vdot(result.packets[0],
                                           result.packets[1])),
                               places=10)

    def test_no_resonance_without_drive(self):
        with self.assertRaises(time_lattice.ResonanceNotFoundError):
            time_lattice.bouncer_floquet(
                time_lattice.BouncerSpec(lam=0.0, omega=1.1))

    def test_basis_too_small(self):
        with self.assertRaises(time_lattice.ParameterError):
            time_lattice.bouncer_basis(
                time_lattice.BouncerSpec(lam=0.06, omega=1.1, basis_size=30))

    def test_too_few_steps(self):
        with self.assertRaises(time_lattice.ParameterError):
            time_lattice.bouncer_monodromy(
                time_lattice.BouncerSpec(lam=0.06,
                                         omega=1.1,
                                         steps_per_period=100))


class BoseHubbardTimeTest(unittest.TestCase):

    def _spec(self, J, onsite, s=5, N=5):
        return time_lattice.BoseHubbardTimeSpec(
            s=s, J=J, U=time_lattice.uniform_interactions(s, onsite), N=N)

    def test_non_interacting_condensate(self):
        report = time_lattice.bose_hubbard_time(self._spec(1.0, 0.0))
        self.assertAlmostEqual(-5.0, report.energies[0], places=8)

    def test_mott_insulator(self):
        report = time_lattice.bose_hubbard_time(self._spec(1.0, 20.0))
        self.assertTrue(np.all(report.number_variance < 0.1))
        self.assertGreater(report.gap, 0.0)

    def test_no_tunneling_gives_single_fock_state(self):
        report = time_lattice.bose_hubbard_time(self._spec(0.0, 1.0))
        self.assertAlmostEqual(1.0, np.max(np.abs(report.ground_state)**2))
        npt.assert_allclose(np.zeros(5), report.number_variance, atol=1e-12)

    def test_ground_energy_falls_with_tunneling(self):
        energies = [
            time_lattice.bose_hubbard_time(self._spec(j, 2.0)).energies[0]
            for j in (0.0, 0.5, 1.0, 2.0)
        ]
        self.assertTrue(np.all(np.diff(energies) < 0))

    def test_particle_number_is_conserved(self):
        report = time_lattice.bose_hubbard_time(self._spec(1.0, 3.0))
        self.assertAlmostEqual(5.0, np.real(np.trace(report.coherence)))

    def test_off_site_interaction_must_not_dominate(self):
        spec = time_lattice.BoseHubbardTimeSpec(
            s=3, J=1.0, U=time_lattice.uniform_interactions(3, 1.0, 2.0), N=3)
        with self.assertRaises(time_lattice.ParameterError):
            time_lattice.bose_hubbard_time(spec)
