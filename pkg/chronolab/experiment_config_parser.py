"""Parses experiment configs.

An experiment config is an INI file:

    [experiment]
    name: else_dtc
    seed: 0
    output: results/else_dtc
    # optional, hex (default) or decimal
    encoding: hex

    [params]
    L: 8
    epsilon: 0.02

Every experiment in the catalog has a parameter schema; omitted parameters
take their defaults and floats may be written as fractions (lam: 1/205).
"""

import collections
import configparser
import fractions

import numpy as np

from chronolab import result_store


class Error(Exception):
    pass


class InvalidConfigError(Error):
    """Indicates an experiment config with one or more violations."""

    def __init__(self, message, violations):
        super(InvalidConfigError, self).__init__(message)
        self.violations = violations


ExperimentConfig = collections.namedtuple(
    'ExperimentConfig', ['name', 'seed', 'output', 'encoding', 'params'])

_REQUIRED = object()

_INT = 'int'
_FLOAT = 'float'
_EXPONENT = 'exponent'
_CHOICE = 'choice'

# Exponent value selecting nearest-neighbour couplings.
NEAREST_NEIGHBOR = 'nn'

# minimum and maximum are inclusive; above and below are strict bounds.
_Param = collections.namedtuple(
    '_Param',
    ['kind', 'default', 'minimum', 'maximum', 'above', 'below', 'choices'])


def _int(default=_REQUIRED, minimum=None, maximum=None):
    return _Param(_INT, default, minimum, maximum, None, None, None)


def _float(default=_REQUIRED, minimum=None, maximum=None, above=None,
           below=None):
    return _Param(_FLOAT, default, minimum, maximum, above, below, None)


def _positive(default):
    return _float(default, above=0.0)


def _fraction(default):
    """A float in [0, 1), such as a flip deviation."""
    return _float(default, 0.0, below=1.0)


def _exponent(default):
    return _Param(_EXPONENT, default, None, None, 0.0, None, None)


def _choice(default, choices):
    return _Param(_CHOICE, default, None, None, None, None, choices)


_YES_NO = ('yes', 'no')

_SPIN_CHAIN = _int(8, 2, 14)

SCHEMAS = {
    'else_dtc': {
        'L': _SPIN_CHAIN,
        'epsilon': _fraction(0.02),
        'J': _float(1.0, 0.0),
        'hz': _float(1.0, 0.0),
        'h': _float(0.3, 0.0),
        'realizations': _int(50, 1),
        'periods': _int(200, 4),
    },
    'khemani_sg': {
        'L': _SPIN_CHAIN,
        'Jz': _float(0.1),
        't1': _positive(1.0),
        't2': _positive(1.0),
        'realizations': _int(100, 1),
        'n_omega': _int(512, 8),
        'eta': _positive(None),
    },
    'yao_phase_diagram': {
        'L': _int(6, 2, 14),
        'alpha': _exponent(NEAREST_NEIGHBOR),
        'jz_min': _float(0.0),
        'jz_max': _float(1.0),
        'jz_points': _int(5, 1),
        'epsilon_min': _fraction(0.0),
        'epsilon_max': _fraction(0.2),
        'epsilon_points': _int(5, 1),
        'hz_max': _float(1.0, 0.0),
        'realizations': _int(10, 1),
        'periods': _int(128, 4),
    },
    'ion_chain': {
        'L': _SPIN_CHAIN,
        'epsilon': _fraction(0.0),
        'J0': _float(1.0),
        'alpha': _positive(1.5),
        'W': _float(0.0, 0.0),
        'realizations': _int(1, 1),
        'periods': _int(100, 4),
    },
    'nv_ensemble': {
        'L': _int(8, 1, 12),
        'tau1': _positive(0.5),
        'tau2': _positive(0.5),
        'omega_x': _float(0.0),
        'omega_y': _float(np.pi),
        'J': _float(1.0),
        'realizations': _int(20, 1),
        'periods': _int(100, 4),
    },
    'gpe_ring': {
        'gamma': _float(-15.0),
        'points': _int(256, 32, 2**16),
        'flux': _float(0.0),
        'tolerance': _positive(1e-9),
        'locate_threshold': _choice('no', _YES_NO),
    },
    'two_mode_cat': {
        'ratio': _float(-4.0),
        'n_min': _int(10, 2),
        'n_max': _int(60, 2),
        'n_step': _int(5, 1),
        'J': _positive(1.0),
        'U12': _float(0.0),
        'precise': _choice('yes', _YES_NO),
    },
    'lloyd_time': {
        's': _int(200, 2),
        'J': _positive(1.0),
        'gamma': _float(1.0, 0.0),
        'realizations': _int(20, 1),
        'period': _positive(1.0),
    },
    'ring_anderson': {
        'V0': _float(1000.0, 0.0),
        'k0': _positive(20.0),
        'K': _int(60, 1),
        'omega': _positive(1.0),
        'cutoff': _int(240, 1),
    },
    'secular_bands': {
        'mass': _positive(1.0),
        'V0': _float(0.2),
        's': _int(4, 1),
        'cutoff': _int(20, 1),
        'points': _int(65, 2),
        'bands': _int(4, 1),
    },
    'phase_crystal': {
        's': _int(10, 1),
        'mu': _float(3.2e-3),
        'lam': _positive(1.0 / 205),
        'n_max': _int(400, 1),
        'bands': _int(3, 1),
    },
    'bouncer': {
        'lam': _float(0.06, 0.0),
        'omega': _positive(1.1),
        's': _int(2, 1),
        'steps': _int(512, 256),
    },
    'mott_time': {
        's': _int(5, 2),
        'N': _int(5, 1),
        'J': _float(1.0, 0.0),
        'U': _float(20.0),
        'U_offsite': _float(0.0),
    },
}

CATALOG = tuple(sorted(SCHEMAS))

# (lower, upper) parameter pairs that must not be inverted.
_ORDERED_PAIRS = (('jz_min', 'jz_max'), ('epsilon_min', 'epsilon_max'),
                  ('n_min', 'n_max'))

# Per-experiment checks that span parameters: (key, test, violation).
_CROSS_CHECKS = {
    'ring_anderson': [('cutoff', lambda p: p['cutoff'] >= 4 * p['K'],
                       'must be >= 4 K')],
    'phase_crystal': [('n_max', lambda p: p['n_max'] >= p['s'],
                       'must be >= s')],
    'mott_time': [('U_offsite', lambda p: (p['U_offsite'] == 0 or
                                          abs(p['U_offsite']) < abs(p['U'])),
                   'must be smaller in magnitude than U')],
}

_EXPERIMENT_KEYS = ('name', 'seed', 'output', 'encoding')


def _parse_int(raw):
    try:
        return int(raw)
    except ValueError:
        raise ValueError('expected an integer (got %s)' % raw)


def _parse_float(raw):
    """Parses a float, accepting fractions such as 1/205."""
    try:
        return float(raw)
    except ValueError:
        pass
    try:
        return float(fractions.Fraction(raw.replace(' ', '')))
    except (ValueError, ZeroDivisionError):
        raise ValueError('expected a number (got %s)' % raw)


def _check_bounds(value, param):
    if param.minimum is not None and value < param.minimum:
        raise ValueError('must be >= %g (got %g)' % (param.minimum, value))
    if param.maximum is not None and value > param.maximum:
        raise ValueError('must be <= %g (got %g)' % (param.maximum, value))
    if param.above is not None and value <= param.above:
        raise ValueError('must be > %g (got %g)' % (param.above, value))
    if param.below is not None and value >= param.below:
        raise ValueError('must be < %g (got %g)' % (param.below, value))


def _parse_value(raw, param):
    """Parses one parameter value.

    Raises:
        ValueError with a message describing the violation.
    """
    raw = raw.strip()
    if param.kind == _CHOICE:
        if raw not in param.choices:
            raise ValueError('must be one of %s (got %s)' %
                             ('|'.join(param.choices), raw))
        return raw
    if param.kind == _EXPONENT and raw == NEAREST_NEIGHBOR:
        return None
    if param.kind == _INT:
        value = _parse_int(raw)
    else:
        value = _parse_float(raw)
        if not np.isfinite(value):
            raise ValueError('must be finite (got %s)' % raw)
    _check_bounds(value, param)
    return value


def _default(param):
    if param.kind == _EXPONENT and param.default == NEAREST_NEIGHBOR:
        return None
    return param.default


def _parse_params(raw_parser, name, violations):
    schema = SCHEMAS[name]
    section = (dict(raw_parser.items('params'))
               if raw_parser.has_section('params') else {})
    params = {}
    for key in sorted(schema):
        param = schema[key]
        if key not in section:
            if param.default is _REQUIRED:
                violations.append('params.%s: missing required parameter' %
                                  key)
            else:
                params[key] = _default(param)
            continue
        try:
            params[key] = _parse_value(section[key], param)
        except ValueError as ex:
            violations.append('params.%s: %s' % (key, ex))
    for key in sorted(set(section) - set(schema)):
        violations.append('params.%s: unknown parameter for %s' % (key, name))
    for lower, upper in _ORDERED_PAIRS:
        if (lower in params and upper in params and
                params[lower] > params[upper]):
            violations.append('params.%s: must be >= %s' % (upper, lower))
    for key, test, message in _CROSS_CHECKS.get(name, ()):
        if set(params) >= set(SCHEMAS[name]) and not test(params):
            violations.append('params.%s: %s' % (key, message))
    return params


def _get(raw_parser, section, key):
    if not raw_parser.has_option(section, key):
        return None
    value = raw_parser.get(section, key).strip()
    return value or None


def parse(config_data):
    """Parses and validates an experiment config from text.

    Every violation is collected before failing, each addressed as
    section.key.

    Args:
        config_data: The contents of an experiment config file.

    Returns:
        An ExperimentConfig.

    Raises:
        InvalidConfigError listing all violations.
    """
    raw_parser = configparser.RawConfigParser()
    raw_parser.optionxform = str
    try:
        raw_parser.read_string(config_data)
    except configparser.Error as ex:
        raise InvalidConfigError('Failed to parse experiment config',
                                 ['config: %s' % ex])
    violations = []
    for section in raw_parser.sections():
        if section not in ('experiment', 'params'):
            violations.append('%s: unknown section' % section)
    if raw_parser.has_section('experiment'):
        for key in raw_parser.options('experiment'):
            if key not in _EXPERIMENT_KEYS:
                violations.append('experiment.%s: unknown key' % key)

    name = _get(raw_parser, 'experiment', 'name')
    if name is None:
        violations.append('experiment.name: missing experiment name')
    elif name not in SCHEMAS:
        violations.append('experiment.name: unknown experiment %s (one of %s)'
                          % (name, ', '.join(CATALOG)))

    seed = None
    raw_seed = _get(raw_parser, 'experiment', 'seed')
    if raw_seed is None:
        violations.append('experiment.seed: missing master seed')
    else:
        try:
            seed = _parse_value(raw_seed, _int(minimum=0))
        except ValueError as ex:
            violations.append('experiment.seed: %s' % ex)

    output = _get(raw_parser, 'experiment', 'output')
    if output is None:
        violations.append('experiment.output: missing output directory')

    encoding = _get(raw_parser, 'experiment', 'encoding') or result_store.HEX
    if encoding not in result_store.ENCODINGS:
        violations.append('experiment.encoding: must be one of %s (got %s)' %
                          ('|'.join(result_store.ENCODINGS), encoding))

    params = {}
    if name in SCHEMAS:
        params = _parse_params(raw_parser, name, violations)

    if violations:
        raise InvalidConfigError(
            'Invalid experiment config:\n  %s' % '\n  '.join(violations),
            violations)
    return ExperimentConfig(name=name,
                            seed=seed,
                            output=output,
                            encoding=encoding,
                            params=params)


def to_json(config):
    """JSON-ready echo of a config for run manifests."""
    return {
        'name': config.name,
        'seed': config.seed,
        'output': config.output,
        'encoding': config.encoding,
        'params': dict(config.params),
    }
