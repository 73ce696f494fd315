import datetime
import io
import os
import shutil
import tempfile
import unittest

import mock
import pytz

from chronolab import experiment_config_parser
from chronolab import experiments
from chronolab import result_store

TIMESTAMP_A = datetime.datetime(2016, 7, 23, 10, 51, 9, 928000, tzinfo=pytz.utc)


class ExperimentsTest(unittest.TestCase):

    def setUp(self):
        self.mock_clock = mock.Mock()
        self.mock_clock.now.return_value = TIMESTAMP_A
        self.mock_clock.seconds_since.return_value = 2.5
        self.root = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.root)

    def make_config(self, name, output='out', **params):
        lines = ['[experiment]', 'name: %s' % name, 'seed: 5',
                 'output: %s' % os.path.join(self.root, output), '',
                 '[params]']
        lines.extend('%s: %s' % item for item in sorted(params.items()))
        return experiment_config_parser.parse('\n'.join(lines) + '\n')

    def run_config(self, config):
        return experiments.run_experiment(config, self.mock_clock)

    def read_bytes(self, config, relative):
        with io.open(os.path.join(config.output, relative), 'rb') as handle:
            return handle.read()

    def test_reruns_produce_identical_result_files(self):
        first = self.make_config('else_dtc', 'a', L=4, realizations=2,
                                 periods=16)
        second = first._replace(output=os.path.join(self.root, 'b'))
        first_manifest = self.run_config(first)
        second_manifest = self.run_config(second)
        self.assertEqual(first_manifest.files, second_manifest.files)
        for relative, _ in first_manifest.files:
            self.assertEqual(self.read_bytes(first, relative),
                             self.read_bytes(second, relative))

    def test_manifest_lists_exactly_the_written_files(self):
        config = self.make_config('else_dtc', L=4, realizations=2, periods=16)
        manifest = self.run_config(config)
        listed = sorted(path for path, _ in manifest.files)
        self.assertEqual(['dft.csv', 'magnetization.csv', 'record.json'],
                         listed)
        written = sorted(
            name for name in os.listdir(config.output)
            if name != result_store.MANIFEST_NAME)
        self.assertEqual(listed, written)
        self.assertEqual(TIMESTAMP_A, manifest.created)
        self.assertEqual(2.5, manifest.wall_clock_seconds)
        self.assertEqual('else_dtc', manifest.config['name'])
        self.assertEqual(5, manifest.config['seed'])
        result_store.verify_manifest(
            os.path.join(config.output, result_store.MANIFEST_NAME))

    def test_magnetization_table_has_one_row_per_period(self):
        config = self.make_config('ion_chain', L=4, periods=12)
        self.run_config(config)
        header, columns = result_store.read_table(
            os.path.join(config.output, 'magnetization.csv'))
        self.assertEqual(['period_index', 'mean', 'sem'], header)
        self.assertEqual(12, len(columns[0]))

    def test_yao_phase_diagram_writes_every_cell(self):
        config = self.make_config('yao_phase_diagram', L=3, realizations=1,
                                  periods=8)
        manifest = self.run_config(config)
        listed = [path for path, _ in manifest.files]
        cells = [path for path in listed if path.startswith('cells/')]
        self.assertEqual(25, len(cells))
        self.assertIn('cells/cell_4_4.json', cells)
        self.assertIn('phase_diagram.csv', listed)
        self.assertEqual(26, len(listed))
        header, columns = result_store.read_table(
            os.path.join(config.output, 'phase_diagram.csv'))
        self.assertEqual('Jz', header[0])
        self.assertEqual(25, len(columns[0]))

    def test_bouncer_writes_floquet_pair_report(self):
        config = self.make_config('bouncer', lam=0.06, omega=1.1)
        self.run_config(config)
        kind, report = result_store.read_envelope(
            os.path.join(config.output, 'floquet_pair.json'))
        self.assertEqual('bouncer', kind)
        self.assertEqual(2, len(report['resonant_states']))
        self.assertGreater(report['splitting'], 0.0)
        self.assertLess(report['splitting'], 0.055)
        self.assertGreaterEqual(report['exchange_overlap'], 0.9)

    def test_mott_time_report(self):
        config = self.make_config('mott_time', s=5, N=5, J=1, U=20)
        self.run_config(config)
        kind, report = result_store.read_envelope(
            os.path.join(config.output, 'mott.json'))
        self.assertEqual('mott_time', kind)
        self.assertGreater(report['gap'], 0.0)
        self.assertLess(max(report['number_variance']), 0.1)

    def test_secular_bands_tables(self):
        config = self.make_config('secular_bands', points=9, bands=3)
        manifest = self.run_config(config)
        self.assertEqual(['bands.csv', 'gaps.csv'],
                         sorted(path for path, _ in manifest.files))
        header, columns = result_store.read_table(
            os.path.join(config.output, 'gaps.csv'))
        self.assertEqual(['band', 'gap'], header)
        self.assertEqual(2, len(columns[1]))

    def test_two_mode_cat_reports_cat_phase(self):
        config = self.make_config('two_mode_cat', n_min=10, n_max=20,
                                  n_step=5)
        self.run_config(config)
        kind, summary = result_store.read_envelope(
            os.path.join(config.output, 'summary.json'))
        self.assertEqual('two_mode_cat', kind)
        self.assertEqual('cat', summary['phase'])
        self.assertGreater(summary['slope'], 0.0)
        self.assertAlmostEqual(0.5, summary['outcome_probability'])

    def test_capacity_error_carries_experiment_context(self):
        config = self.make_config('else_dtc', L=4, realizations=1, periods=8)
        with mock.patch.dict(os.environ, {'CHRONO_MAX_DIM': '8'}):
            with self.assertRaises(experiments.ExperimentError) as context:
                self.run_config(config)
        self.assertIn('else_dtc', str(context.exception))
        self.assertIn('CapacityError', str(context.exception))
        self.assertFalse(
            os.path.exists(
                os.path.join(config.output, result_store.MANIFEST_NAME)))

    def test_unwritable_output_raises_store_error(self):
        blocker = os.path.join(self.root, 'blocker')
        with io.open(blocker, 'w') as handle:
            handle.write(u'not a directory')
        config = self.make_config('mott_time', s=3, N=2)._replace(
            output=os.path.join(blocker, 'out'))
        with self.assertRaises(result_store.StoreIOError):
            self.run_config(config)


if __name__ == '__main__':
    unittest.main()
