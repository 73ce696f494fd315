import os
import shutil
import tempfile
import unittest

import numpy as np
from numpy import testing as npt

from chronolab import result_store
from chronolab import two_mode_dtc


class BuildTwoModeTest(unittest.TestCase):

    def test_two_particle_matrix(self):
        params = two_mode_dtc.TwoModeParams(J=1.0, U=0.6, U12=0.1, N=2)
        g = 0.25 * (0.6 - 0.2)
        expected = np.array([[1.0, 0.0, 2 * g], [0.0, 2 * g, 0.0],
                             [2 * g, 0.0, -1.0]])
        npt.assert_allclose(expected,
                            two_mode_dtc.build_two_mode(params).matrix,
                            atol=1e-15)

    def test_non_interacting_spectrum_is_equally_spaced(self):
        params = two_mode_dtc.TwoModeParams(J=0.7, U=0.0, U12=0.0, N=6)
        values = np.linalg.eigvalsh(two_mode_dtc.build_two_mode(params).matrix)
        npt.assert_allclose(0.7 * np.ones(6), np.diff(values), atol=1e-12)

    def test_hermitian(self):
        h = two_mode_dtc.build_two_mode(
            two_mode_dtc.params_at_ratio(-4.0, 12)).matrix
        self.assertLessEqual(np.max(np.abs(h - h.conj().T)), 1e-12)

    def test_sectors_do_not_mix(self):
        h = two_mode_dtc.build_two_mode(
            two_mode_dtc.params_at_ratio(-3.0, 9)).matrix
        for i in range(10):
            for j in range(10):
                if (i - j) % 2:
                    self.assertEqual(0.0, h[i, j])

    def test_invalid_parameters(self):
        with self.assertRaises(two_mode_dtc.ParameterError):
            two_mode_dtc.build_two_mode(
                two_mode_dtc.TwoModeParams(J=1.0, U=0.0, U12=0.0, N=1))
        with self.assertRaises(two_mode_dtc.ParameterError):
            two_mode_dtc.build_two_mode(
                two_mode_dtc.TwoModeParams(J=0.0, U=0.0, U12=0.0, N=4))


class WavePacketBasisTest(unittest.TestCase):

    def test_transform_is_orthogonal(self):
        w = two_mode_dtc.wave_packet_transform(12)
        npt.assert_allclose(np.eye(13), w.T.dot(w), atol=1e-12)

    def test_hamiltonian_is_tridiagonal_in_wave_packet_basis(self):
        params = two_mode_dtc.params_at_ratio(-4.0, 8)
        w = two_mode_dtc.wave_packet_transform(8)
        rotated = w.T.dot(two_mode_dtc.build_two_mode(params).matrix).dot(w)
        diagonal, off = two_mode_dtc.wave_packet_tridiagonal(params)
        expected = np.diag(diagonal) + np.diag(off, 1) + np.diag(off, -1)
        npt.assert_allclose(expected, rotated, atol=1e-12)

    def test_ideal_cat_variance(self):
        for n in (4, 7, 20):
            cat = two_mode_dtc.ideal_cat(n)
            self.assertAlmostEqual(
                n**2, two_mode_dtc.number_difference_variance(cat), places=8)

    def test_ideal_cat_has_even_u2_occupations(self):
        amplitudes = two_mode_dtc.ideal_cat(6).amplitudes
        npt.assert_allclose(np.zeros(3), amplitudes[1::2], atol=1e-12)


class ClassifyGroundTest(unittest.TestCase):

    def test_weak_interaction_gives_condensate(self):
        result = two_mode_dtc.classify_ground(
            two_mode_dtc.params_at_ratio(-0.5, 20))
        self.assertEqual(two_mode_dtc.CONDENSATE, result.phase)
        self.assertFalse(result.marginal)

    def test_non_interacting_ground_fills_first_mode(self):
        params = two_mode_dtc.TwoModeParams(J=1.0, U=0.0, U12=0.0, N=10)
        (even_energy, even), (odd_energy, _) = (
            two_mode_dtc.sector_ground_states(params))
        self.assertLess(even_energy, odd_energy)
        self.assertAlmostEqual(1.0, abs(even.amplitudes[10])**2)

    def test_strong_attraction_gives_cat(self):
        result = two_mode_dtc.classify_ground(
            two_mode_dtc.params_at_ratio(-4.0, 20))
        self.assertEqual(two_mode_dtc.CAT, result.phase)
        occupations = result.wave_packet_occupations
        self.assertAlmostEqual(occupations[0], occupations[-1], places=8)

    def test_near_boundary_is_marginal(self):
        result = two_mode_dtc.classify_ground(
            two_mode_dtc.params_at_ratio(-1.05, 20))
        self.assertTrue(result.marginal)

    def test_cat_pair_shares_branch_weight(self):
        params = two_mode_dtc.params_at_ratio(-8.0, 20)
        branch = np.zeros(21)
        branch[20] = 1.0
        branch_state = two_mode_dtc.from_wave_packet_basis(20, branch)
        (_, even), (_, odd) = two_mode_dtc.sector_ground_states(params)
        self.assertAlmostEqual(
            abs(np.vdot(even.amplitudes, branch_state.amplitudes))**2,
            abs(np.vdot(odd.amplitudes, branch_state.amplitudes))**2,
            delta=1e-6)


class TunnelingGapTest(unittest.TestCase):

    def test_non_interacting_gap_is_tunneling_energy(self):
        for n in (4, 9, 30):
            params = two_mode_dtc.TwoModeParams(J=1.0, U=0.0, U12=0.0, N=n)
            self.assertAlmostEqual(1.0, two_mode_dtc.tunneling_gap(params))
            self.assertAlmostEqual(
                1.0, two_mode_dtc.tunneling_gap(params, precise=False))

    def test_precise_and_double_paths_agree_on_resolved_gaps(self):
        params = two_mode_dtc.params_at_ratio(-4.0, 10)
        precise = two_mode_dtc.tunneling_gap(params)
        double = two_mode_dtc.tunneling_gap(params, precise=False)
        self.assertGreater(double, 1e-10)
        self.assertAlmostEqual(1.0, double / precise, places=4)

    def test_gap_opens_across_condition_boundary(self):
        weak = two_mode_dtc.tunneling_gap(two_mode_dtc.params_at_ratio(
            -0.5, 20))
        strong = two_mode_dtc.tunneling_gap(
            two_mode_dtc.params_at_ratio(-4.0, 20))
        self.assertLess(strong, 1e-3 * weak)

    def test_cat_gap_closes_exponentially(self):
        scaling = two_mode_dtc.gap_scaling(-4.0, range(10, 61, 5))
        self.assertGreater(scaling.slope, 0.0)
        self.assertGreaterEqual(scaling.r_squared, 0.98)
        self.assertEqual([], scaling.excluded)
        self.assertTrue(np.all(np.diff(scaling.gaps) < 0))
        self.assertLess(scaling.gaps[-1], 1e-14)

    def test_double_precision_excludes_unresolved_gaps(self):
        scaling = two_mode_dtc.gap_scaling(-4.0, range(10, 61, 10),
                                           precise=False)
        self.assertIn(60, scaling.excluded)
        self.assertNotIn(10, scaling.excluded)

    def test_particle_numbers_must_ascend(self):
        with self.assertRaises(two_mode_dtc.ParameterError):
            two_mode_dtc.gap_scaling(-4.0, [20, 10])

    def test_write_gap_scaling(self):
        out_dir = tempfile.mkdtemp()
        try:
            scaling = two_mode_dtc.gap_scaling(-4.0, [10, 12, 14])
            path = two_mode_dtc.write_gap_scaling(
                os.path.join(out_dir, 'gaps.csv'), scaling)
            header, columns = result_store.read_table(path)
        finally:
            shutil.rmtree(out_dir)
        self.assertEqual(['N', 'gap', 'log_inv_gap'], header)
        npt.assert_array_equal([10.0, 12.0, 14.0], columns[0])
        npt.assert_allclose(-np.log(columns[1]), columns[2])


class MeasurementTest(unittest.TestCase):

    def test_cat_outcomes_are_equally_likely(self):
        cat = two_mode_dtc.ideal_cat(10)
        for mode in (0, 1):
            probability, _ = two_mode_dtc.measure(cat, mode)
            self.assertAlmostEqual(0.5, probability)

    def test_collapse_selects_one_branch(self):
        probability, collapsed = two_mode_dtc.measure(
            two_mode_dtc.ideal_cat(10), 0)
        amplitudes = two_mode_dtc.to_wave_packet_basis(collapsed)
        self.assertEqual(9, collapsed.particles)
        self.assertAlmostEqual(1.0, abs(amplitudes[9])**2)

    def test_collapse_into_second_packet(self):
        _, collapsed = two_mode_dtc.measure(two_mode_dtc.ideal_cat(10), 1)
        amplitudes = two_mode_dtc.to_wave_packet_basis(collapsed)
        self.assertAlmostEqual(1.0, abs(amplitudes[0])**2)

    def test_impossible_outcome(self):
        branch = np.zeros(9)
        branch[8] = 1.0
        state = two_mode_dtc.from_wave_packet_basis(8, branch)
        with self.assertRaises(two_mode_dtc.MeasurementError):
            two_mode_dtc.measure(state, 1)

    def test_collapsed_branch_survives_evolution(self):
        params = two_mode_dtc.params_at_ratio(-10.0, 20)
        result = two_mode_dtc.collapse_evolve(params,
                                              two_mode_dtc.ideal_cat(20), 0,
                                              np.linspace(0.0, 5.0, 11))
        self.assertAlmostEqual(0.5, result.probability)
        self.assertTrue(np.all(result.branch_trace >= 0.99))

    def test_repeated_measurements_keep_the_branch(self):
        params = two_mode_dtc.params_at_ratio(-10.0, 20)
        branch = two_mode_dtc.repeated_measurements(params,
                                                    two_mode_dtc.ideal_cat(20),
                                                    1, 10, 1.0)
        self.assertEqual(10, len(branch))
        self.assertTrue(np.all(branch >= 0.99))

    def test_too_many_measurements(self):
        with self.assertRaises(two_mode_dtc.ParameterError):
            two_mode_dtc.repeated_measurements(
                two_mode_dtc.params_at_ratio(-10.0, 6),
                two_mode_dtc.ideal_cat(6), 0, 5, 1.0)
