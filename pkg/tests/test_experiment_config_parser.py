import glob
import io
import os
import unittest

import numpy as np

from chronolab import experiment_config_parser


class ExperimentConfigParserTest(unittest.TestCase):

    def assertViolations(self, config_data, expected):
        with self.assertRaises(
                experiment_config_parser.InvalidConfigError) as context:
            experiment_config_parser.parse(config_data)
        for violation in expected:
            self.assertIn(violation, context.exception.violations)
        return context.exception.violations

    def test_empty_config_is_missing_experiment_name(self):
        self.assertViolations('', ['experiment.name: missing experiment name'])

    def test_full_config_parses_successfully(self):
        config = experiment_config_parser.parse("""
[experiment]
name: else_dtc
seed: 17
output: results/else_dtc

[params]
L: 8
epsilon: 0.02
h: 0.3
realizations: 50
""")
        self.assertEqual('else_dtc', config.name)
        self.assertEqual(17, config.seed)
        self.assertEqual('results/else_dtc', config.output)
        self.assertEqual('hex', config.encoding)
        self.assertEqual(8, config.params['L'])
        self.assertAlmostEqual(0.02, config.params['epsilon'])
        self.assertAlmostEqual(0.3, config.params['h'])
        self.assertEqual(50, config.params['realizations'])
        # Omitted parameters take their defaults.
        self.assertEqual(1.0, config.params['J'])
        self.assertEqual(200, config.params['periods'])

    def test_rejects_negative_epsilon(self):
        self.assertViolations(
            """
[experiment]
name: else_dtc
seed: 0
output: out

[params]
epsilon: -0.5
""", ['params.epsilon: must be >= 0 (got -0.5)'])

    def test_rejects_epsilon_of_one(self):
        self.assertViolations(
            """
[experiment]
name: else_dtc
seed: 0
output: out

[params]
epsilon: 1
""", ['params.epsilon: must be < 1 (got 1)'])

    def test_rejects_zero_broadening(self):
        self.assertViolations(
            """
[experiment]
name: khemani_sg
seed: 0
output: out

[params]
eta: 0
""", ['params.eta: must be > 0 (got 0)'])

    def test_rejects_non_positive_exponents(self):
        self.assertViolations(
            """
[experiment]
name: ion_chain
seed: 0
output: out

[params]
alpha: 0
""", ['params.alpha: must be > 0 (got 0)'])
        self.assertViolations(
            """
[experiment]
name: yao_phase_diagram
seed: 0
output: out

[params]
alpha: 0
epsilon_max: 1
""", [
                'params.alpha: must be > 0 (got 0)',
                'params.epsilon_max: must be < 1 (got 1)'
            ])

    def test_rejects_zero_drive_durations(self):
        self.assertViolations(
            """
[experiment]
name: nv_ensemble
seed: 0
output: out

[params]
tau1: 0
""", ['params.tau1: must be > 0 (got 0)'])

    def test_rejects_inconsistent_parameter_combinations(self):
        self.assertViolations(
            """
[experiment]
name: ring_anderson
seed: 0
output: out

[params]
K: 60
cutoff: 200
""", ['params.cutoff: must be >= 4 K'])
        self.assertViolations(
            """
[experiment]
name: phase_crystal
seed: 0
output: out

[params]
s: 10
n_max: 5
""", ['params.n_max: must be >= s'])
        self.assertViolations(
            """
[experiment]
name: mott_time
seed: 0
output: out

[params]
U: 2
U_offsite: 3
""", ['params.U_offsite: must be smaller in magnitude than U'])

    def test_rejects_chain_above_capacity(self):
        self.assertViolations(
            """
[experiment]
name: khemani_sg
seed: 0
output: out

[params]
L: 15
""", ['params.L: must be <= 14 (got 15)'])

    def test_rejects_unknown_experiment(self):
        violations = self.assertViolations(
            """
[experiment]
name: discrete_crystal
seed: 0
output: out
""", [])
        self.assertEqual(1, len(violations))
        self.assertTrue(violations[0].startswith(
            'experiment.name: unknown experiment discrete_crystal'))

    def test_rejects_unknown_parameter(self):
        self.assertViolations(
            """
[experiment]
name: bouncer
seed: 0
output: out

[params]
omega: 1.1
kick: 3
""", ['params.kick: unknown parameter for bouncer'])

    def test_rejects_type_mismatch(self):
        self.assertViolations(
            """
[experiment]
name: mott_time
seed: 0
output: out

[params]
s: five
U: lots
""", [
                'params.s: expected an integer (got five)',
                'params.U: expected a number (got lots)'
            ])

    def test_collects_every_violation(self):
        violations = self.assertViolations(
            """
[experiment]
name: two_mode_cat
output: out
encoding: base64
colour: blue

[params]
n_min: 40
n_max: 20
precise: maybe

[extras]
a: 1
""", [
                'experiment.seed: missing master seed',
                'experiment.encoding: must be one of hex|decimal (got base64)',
                'experiment.colour: unknown key',
                'extras: unknown section',
                'params.n_max: must be >= n_min',
                'params.precise: must be one of yes|no (got maybe)',
            ])
        self.assertEqual(6, len(violations))

    def test_error_message_lists_violations(self):
        with self.assertRaises(
                experiment_config_parser.InvalidConfigError) as context:
            experiment_config_parser.parse("""
[experiment]
name: gpe_ring
""")
        message = str(context.exception)
        self.assertIn('experiment.seed: missing master seed', message)
        self.assertIn('experiment.output: missing output directory', message)

    def test_rejects_negative_seed(self):
        self.assertViolations(
            """
[experiment]
name: gpe_ring
seed: -1
output: out
""", ['experiment.seed: must be >= 0 (got -1)'])

    def test_accepts_fractions(self):
        config = experiment_config_parser.parse("""
[experiment]
name: phase_crystal
seed: 0
output: out

[params]
lam: 1/205
""")
        self.assertAlmostEqual(1.0 / 205, config.params['lam'])

    def test_rejects_non_finite_numbers(self):
        self.assertViolations(
            """
[experiment]
name: secular_bands
seed: 0
output: out

[params]
V0: inf
""", ['params.V0: must be finite (got inf)'])

    def test_nearest_neighbour_exponent(self):
        config = experiment_config_parser.parse("""
[experiment]
name: yao_phase_diagram
seed: 3
output: out

[params]
alpha: nn
""")
        self.assertIsNone(config.params['alpha'])
        config = experiment_config_parser.parse("""
[experiment]
name: yao_phase_diagram
seed: 3
output: out

[params]
alpha: 1.5
""")
        self.assertEqual(1.5, config.params['alpha'])

    def test_decimal_encoding(self):
        config = experiment_config_parser.parse("""
[experiment]
name: gpe_ring
seed: 0
output: out
encoding: decimal
""")
        self.assertEqual('decimal', config.encoding)

    def test_default_parameters_cover_every_catalog_entry(self):
        for name in experiment_config_parser.CATALOG:
            config = experiment_config_parser.parse("""
[experiment]
name: %s
seed: 0
output: out
""" % name)
            self.assertEqual(name, config.name)
            self.assertEqual(
                sorted(experiment_config_parser.SCHEMAS[name]),
                sorted(config.params))

    def test_example_configs_are_valid(self):
        config_dir = os.path.join(os.path.dirname(__file__), os.pardir,
                                  'configs')
        paths = sorted(glob.glob(os.path.join(config_dir, '*.ini')))
        names = []
        for path in paths:
            with io.open(path, encoding='utf-8') as config_file:
                names.append(
                    experiment_config_parser.parse(config_file.read()).name)
        self.assertEqual(list(experiment_config_parser.CATALOG), names)

    def test_nv_default_rotation_is_pi(self):
        config = experiment_config_parser.parse("""
[experiment]
name: nv_ensemble
seed: 0
output: out
""")
        self.assertAlmostEqual(np.pi, config.params['omega_y'])

    def test_unparseable_text(self):
        violations = self.assertViolations('name = else_dtc\n', [])
        self.assertEqual(1, len(violations))
        self.assertTrue(violations[0].startswith('config: '))

    def test_to_json_echoes_config(self):
        config = experiment_config_parser.parse("""
[experiment]
name: bouncer
seed: 4
output: out
""")
        echo = experiment_config_parser.to_json(config)
        self.assertEqual('bouncer', echo['name'])
        self.assertEqual(4, echo['seed'])
        self.assertEqual(0.06, echo['params']['lam'])


if __name__ == '__main__':
    unittest.main()
