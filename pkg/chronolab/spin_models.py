"""One-period Floquet unitaries of driven disordered spin chains.

Every model is described by an immutable spec namedtuple. Disorder is drawn
separately by sample_realization(spec, seed) and handed to the matching
builder, so the same realization can be reused across builds and compared
between specs that share a geometry.
"""

import collections
import logging

import numpy as np

from chronolab import opalg
from chronolab import random_streams

logger = logging.getLogger(__name__)

OPEN = 'open'
PERIODIC = 'periodic'
NEAREST_NEIGHBOR = None

_NV_MAX_SITES = 12
_NV_MAX_ATTEMPTS = 1000


class Error(Exception):
    pass


class RealizationMismatchError(Error):
    """Indicates a disorder realization that does not belong to the spec."""


class SamplingError(Error):
    """Indicates that valid disorder could not be drawn."""


class SpecError(Error):
    """Indicates a model spec with invalid parameters."""


KhemaniSpec = collections.namedtuple(
    'KhemaniSpec',
    ['L', 'Jz', 't1', 't2', 'range_ht1', 'range_Jt2', 'boundary'],
    defaults=((1.512, 1.551), (0.393, 1.492), OPEN))

MinimalSpec = collections.namedtuple(
    'MinimalSpec', ['L', 't1', 't2', 'range_ht1', 'Jz', 'dJ', 'boundary'],
    defaults=(OPEN,))

ElseSpec = collections.namedtuple(
    'ElseSpec', ['L', 'epsilon', 't1', 't2', 'J', 'hz', 'h', 'boundary'],
    defaults=(np.pi / 2, 1.0, 1.0, 1.0, 0.3, OPEN))

# alpha=None selects nearest-neighbour couplings.
YaoSpec = collections.namedtuple(
    'YaoSpec', ['L', 'epsilon', 'Jz', 'alpha', 't1', 't2', 'range_hz',
                'boundary'],
    defaults=(NEAREST_NEIGHBOR, np.pi / 2, 1.0, (0.0, 1.0), OPEN))

IonSpec = collections.namedtuple(
    'IonSpec', ['L', 'epsilon', 'J0', 'alpha', 'W', 't1', 't2', 't3'],
    defaults=(1.0, 1.5, 0.0, 0.2, 0.36, 0.44))

NVSpec = collections.namedtuple(
    'NVSpec', ['L', 'tau1', 'tau2', 'omega_x', 'omega_y', 'delta_range', 'J',
               'min_separation'],
    defaults=((-1.0, 1.0), 1.0, 0.1))

# Sampled disorder: fields maps a name ('h', 'J', ...) to a read-only array.
DisorderRealization = collections.namedtuple('DisorderRealization',
                                             ['model', 'seed', 'fields'])


def bonds(L, boundary):
    """Nearest-neighbour bonds (i, j) with i < j."""
    pairs = [(i, i + 1) for i in range(L - 1)]
    if boundary == PERIODIC and L > 2:
        pairs.append((0, L - 1))
    return pairs


def _distance(i, j, L, boundary):
    d = abs(i - j)
    if boundary == PERIODIC:
        d = min(d, L - d)
    return d


def _all_pairs(L):
    return [(i, j) for i in range(L) for j in range(i + 1, L)]


def _check_interval(name, interval):
    low, high = interval
    if not low <= high:
        raise SpecError('Interval %s is empty: [%g, %g]' % (name, low, high))


def _check_chain(spec, minimum=2):
    if spec.L < minimum:
        raise SpecError('Chain needs at least %d spins: %d' %
                        (minimum, spec.L))
    if getattr(spec, 'boundary', OPEN) not in (OPEN, PERIODIC):
        raise SpecError('Unknown boundary condition: %s' % spec.boundary)


def _check_epsilon(spec):
    if not 0.0 <= spec.epsilon < 1.0:
        raise SpecError('Flip deviation must lie in [0, 1): %g' %
                        spec.epsilon)


def _frozen(values):
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


def _realization(tag, seed, **fields):
    return DisorderRealization(
        model=tag,
        seed=int(seed),
        fields={name: _frozen(values) for name, values in fields.items()})


def _zz_diagonal(L, couplings):
    """Diagonal of sum_b J_b z_i z_j for a mapping {(i, j): J_b}."""
    diagonal = np.zeros(2**L)
    for (i, j), coupling in couplings.items():
        diagonal += coupling * opalg.z_diagonal(L, [i, j])
    return diagonal


def _field_diagonal(L, fields):
    diagonal = np.zeros(2**L)
    for i, field in enumerate(fields):
        diagonal += field * opalg.z_diagonal(L, [i])
    return diagonal


def _hamiltonian(L, terms):
    """Dense Hermitian operator from (ops, coefficient) Pauli terms."""
    matrix = np.zeros((2**L, 2**L), dtype=complex)
    for ops, coefficient in terms:
        opalg.add_pauli_term(matrix, L, ops, coefficient)
    return opalg.HermitianOperator(matrix)


def _expect_fields(spec, tag, realization, lengths):
    if realization.model != tag:
        raise RealizationMismatchError(
            'Realization of model %s cannot build model %s' %
            (realization.model, tag))
    for name, length in lengths.items():
        values = realization.fields.get(name)
        if values is None or len(values) != length:
            raise RealizationMismatchError(
                'Realization field %s does not match %s with L=%d' %
                (name, tag, spec.L))


# Khemani binary drive.


def _validate_khemani(spec):
    _check_chain(spec)
    _check_interval('range_ht1', spec.range_ht1)
    _check_interval('range_Jt2', spec.range_Jt2)
    if spec.t1 <= 0 or spec.t2 <= 0:
        raise SpecError('Drive durations must be positive')


def _sample_khemani(spec, seed):
    L = spec.L
    return _realization(
        'khemani',
        seed,
        ht1=random_streams.uniform(seed, 'khemani.ht1', range(L),
                                   spec.range_ht1),
        Jt2=random_streams.uniform(seed, 'khemani.Jt2',
                                   bonds(L, spec.boundary), spec.range_Jt2))


def build_floquet_khemani(spec, realization):
    """U = exp(-i t2 H_x) exp(-i t1 H_z).

    H_z = sum h_i z_i + Jz sum z_i z_{i+1} and
    H_x = sum J_i x_i x_{i+1} + Jz sum z_i z_{i+1}; the realization carries
    the products h_i t1 and J_i t2.
    """
    _validate_khemani(spec)
    L = spec.L
    pairs = bonds(L, spec.boundary)
    _expect_fields(spec, 'khemani', realization, {
        'ht1': L,
        'Jt2': len(pairs)
    })
    fields = realization.fields
    z_phase = (_field_diagonal(L, fields['ht1']) + spec.t1 * _zz_diagonal(
        L, {pair: spec.Jz for pair in pairs}))
    terms = []
    for pair, jt2 in zip(pairs, fields['Jt2']):
        terms.append(({pair[0]: 'x', pair[1]: 'x'}, jt2))
        terms.append(({pair[0]: 'z', pair[1]: 'z'}, spec.Jz * spec.t2))
    x_step = opalg.unitary_exp(_hamiltonian(L, terms), 1.0)
    return opalg.UnitaryOperator(x_step.matrix *
                                 np.exp(-1j * z_phase)[np.newaxis, :])


# Minimal drive.


def _validate_minimal(spec):
    _check_chain(spec)
    _check_interval('range_ht1', spec.range_ht1)
    if spec.dJ < 0:
        raise SpecError('Coupling spread dJ must be non-negative: %g' %
                        spec.dJ)


def _sample_minimal(spec, seed):
    L = spec.L
    return _realization(
        'minimal',
        seed,
        ht1=random_streams.uniform(seed, 'minimal.ht1', range(L),
                                   spec.range_ht1),
        J=random_streams.uniform(seed, 'minimal.J', bonds(L, spec.boundary),
                                 (spec.Jz - spec.dJ, spec.Jz + spec.dJ)))


def build_floquet_minimal(spec, realization):
    """U = exp(-i t2 sum J_i z_i z_{i+1}) exp(-i t1 sum h_i x_i)."""
    _validate_minimal(spec)
    L = spec.L
    pairs = bonds(L, spec.boundary)
    _expect_fields(spec, 'minimal', realization, {
        'ht1': L,
        'J': len(pairs)
    })
    flips = opalg.local_rotations(
        [opalg.rotation('x', angle) for angle in realization.fields['ht1']])
    phases = np.exp(-1j * spec.t2 * _zz_diagonal(
        L, dict(zip(pairs, realization.fields['J']))))
    return opalg.UnitaryOperator(phases[:, np.newaxis] * flips.matrix)


# Else MBL drive.


def _validate_else(spec):
    _check_chain(spec)
    _check_epsilon(spec)
    if spec.J < 0 or spec.hz < 0 or spec.h < 0:
        raise SpecError('Disorder scales J, hz and h must be non-negative')


def _sample_else(spec, seed):
    L = spec.L
    return _realization(
        'else',
        seed,
        J=random_streams.uniform(seed, 'else.J', bonds(L, spec.boundary),
                                 (spec.J / 2, 3 * spec.J / 2)),
        hz=random_streams.uniform(seed, 'else.hz', range(L), (0.0, spec.hz)),
        hx=random_streams.uniform(seed, 'else.hx', range(L), (0.0, spec.h)))


def _imperfect_flip(L, t1, epsilon):
    return opalg.local_rotations(
        [opalg.rotation('x', t1 * (1.0 - epsilon))] * L)


def build_floquet_else(spec, realization):
    """U = exp(-i t2 H_MBL) exp(-i t1 (1 - epsilon) sum x_i)."""
    _validate_else(spec)
    L = spec.L
    pairs = bonds(L, spec.boundary)
    _expect_fields(spec, 'else', realization, {
        'J': len(pairs),
        'hz': L,
        'hx': L
    })
    fields = realization.fields
    flip = _imperfect_flip(L, spec.t1, spec.epsilon).matrix
    diagonal = (_zz_diagonal(L, dict(zip(pairs, fields['J']))) +
                _field_diagonal(L, fields['hz']))
    if not np.any(fields['hx']):
        phases = np.exp(-1j * spec.t2 * diagonal)
        return opalg.UnitaryOperator(phases[:, np.newaxis] * flip)
    h_mbl = np.diag(diagonal).astype(complex)
    for i, field in enumerate(fields['hx']):
        opalg.add_pauli_term(h_mbl, L, {i: 'x'}, field)
    evolution = opalg.unitary_exp(h_mbl, spec.t2).matrix
    return opalg.UnitaryOperator(evolution.dot(flip))


# Yao long-range drive.


def _yao_pairs(spec):
    if spec.alpha is NEAREST_NEIGHBOR:
        return bonds(spec.L, spec.boundary)
    return _all_pairs(spec.L)


def _validate_yao(spec):
    _check_chain(spec)
    _check_epsilon(spec)
    _check_interval('range_hz', spec.range_hz)
    if spec.alpha is not NEAREST_NEIGHBOR and spec.alpha <= 0:
        raise SpecError('Power-law exponent must be positive: %g' %
                        spec.alpha)


def _sample_yao(spec, seed):
    return _realization(
        'yao',
        seed,
        J=random_streams.uniform(seed, 'yao.J', _yao_pairs(spec),
                                 sorted((0.8 * spec.Jz, 1.2 * spec.Jz))),
        hz=random_streams.uniform(seed, 'yao.hz', range(spec.L),
                                  spec.range_hz))


def build_floquet_yao(spec, realization):
    """U = exp(-i t2 (sum J_ij / r_ij^alpha z_i z_j + sum h_i z_i)) U_flip.

    Pairs are counted once (i < j). With the nearest-neighbour sentinel the
    operator coincides with the Else drive at h = 0.
    """
    _validate_yao(spec)
    L = spec.L
    pairs = _yao_pairs(spec)
    _expect_fields(spec, 'yao', realization, {'J': len(pairs), 'hz': L})
    couplings = {}
    for (i, j), coupling in zip(pairs, realization.fields['J']):
        if spec.alpha is not NEAREST_NEIGHBOR:
            coupling /= _distance(i, j, L, spec.boundary)**spec.alpha
        couplings[(i, j)] = coupling
    diagonal = (_zz_diagonal(L, couplings) +
                _field_diagonal(L, realization.fields['hz']))
    phases = np.exp(-1j * spec.t2 * diagonal)
    flip = _imperfect_flip(L, spec.t1, spec.epsilon).matrix
    return opalg.UnitaryOperator(phases[:, np.newaxis] * flip)


# Trapped-ion chain.


def _validate_ion(spec):
    _check_chain(spec)
    _check_epsilon(spec)
    if spec.alpha <= 0:
        raise SpecError('Power-law exponent must be positive: %g' %
                        spec.alpha)
    if spec.W < 0:
        raise SpecError('Disorder amplitude must be non-negative: %g' %
                        spec.W)
    if min(spec.t1, spec.t2, spec.t3) <= 0:
        raise SpecError('Drive durations must be positive')


def _sample_ion(spec, seed):
    return _realization(
        'ion',
        seed,
        h=random_streams.uniform(seed, 'ion.h', range(spec.L), (0.0,
                                                                 spec.W)))


def build_floquet_ion(spec, realization):
    """U = exp(-i H3 t3) exp(-i H2 t2) exp(-i H1 t1).

    H1 rotates every spin by pi (1 - epsilon) about y, H2 = sum_{i<j}
    J0 / |i-j|^alpha x_i x_j and H3 = sum h_i x_i. H2 and H3 are diagonal in
    the x basis and are applied through a Hadamard change of basis.
    """
    _validate_ion(spec)
    L = spec.L
    _expect_fields(spec, 'ion', realization, {'h': L})
    couplings = {(i, j): spec.J0 / float(j - i)**spec.alpha
                 for i, j in _all_pairs(L)}
    x_phase = (spec.t2 * _zz_diagonal(L, couplings) +
               spec.t3 * _field_diagonal(L, realization.fields['h']))
    hadamard = opalg.local_rotations(
        [np.array([[1, 1], [1, -1]]) / np.sqrt(2)] * L).matrix
    rotate = opalg.local_rotations(
        [opalg.rotation('y', (np.pi / 2) * (1.0 - spec.epsilon))] * L).matrix
    x_step = (hadamard * np.exp(-1j * x_phase)[np.newaxis, :]).dot(hadamard)
    return opalg.UnitaryOperator(x_step.dot(rotate))


# Nitrogen-vacancy ensemble.


def _validate_nv(spec):
    _check_chain(spec, minimum=1)
    if spec.L > _NV_MAX_SITES:
        raise SpecError('NV ensembles are limited to %d spins: %d' %
                        (_NV_MAX_SITES, spec.L))
    if spec.tau1 <= 0 or spec.tau2 <= 0:
        raise SpecError('Drive durations must be positive')
    if spec.min_separation < 0:
        raise SpecError('Minimum separation must be non-negative')
    _check_interval('delta_range', spec.delta_range)


def _sample_positions(spec, seed):
    positions = []
    for site in range(spec.L):
        for attempt in range(_NV_MAX_ATTEMPTS):
            candidate = random_streams.generator(seed, 'nv.position', site,
                                                 attempt).uniform(size=3)
            if all(
                    np.linalg.norm(candidate - other) >= spec.min_separation
                    for other in positions):
                positions.append(candidate)
                if attempt:
                    logger.debug('Placed NV spin %d after %d rejections',
                                 site, attempt)
                break
        else:
            raise SamplingError(
                'Could not place spin %d at separation %g after %d attempts'
                % (site, spec.min_separation, _NV_MAX_ATTEMPTS))
    return np.array(positions).reshape(spec.L, 3)


def _sample_nv(spec, seed):
    return _realization(
        'nv',
        seed,
        positions=_sample_positions(spec, seed),
        delta=random_streams.uniform(seed, 'nv.delta', range(spec.L),
                                     spec.delta_range))


def _nv_hamiltonian(spec, realization, axis, rabi):
    L = spec.L
    positions = realization.fields['positions']
    terms = [({i: axis}, rabi) for i in range(L)]
    terms += [({i: 'z'}, delta)
              for i, delta in enumerate(realization.fields['delta'])]
    for i, j in _all_pairs(L):
        distance = np.linalg.norm(positions[i] - positions[j])
        if distance < spec.min_separation or distance == 0.0:
            raise SamplingError('Spins %d and %d are closer than %g' %
                                (i, j, spec.min_separation))
        coupling = spec.J / distance**3
        terms.append(({i: 'x', j: 'x'}, coupling))
        terms.append(({i: 'y', j: 'y'}, coupling))
        terms.append(({i: 'z', j: 'z'}, -coupling))
    return _hamiltonian(L, terms)


def build_floquet_nv(spec, realization):
    """U = exp(-i H_y tau2) exp(-i H_x tau1).

    Each step holds the isotropic dipolar interaction
    J / r^3 (xx + yy - zz) and the on-site detunings; the first drives with
    omega_x sigma^x and the second with omega_y sigma^y, which rotates every
    spin by 2 omega_y tau2.
    """
    _validate_nv(spec)
    _expect_fields(spec, 'nv', realization, {
        'positions': spec.L,
        'delta': spec.L
    })
    x_drive = opalg.unitary_exp(
        _nv_hamiltonian(spec, realization, 'x', spec.omega_x), spec.tau1)
    y_drive = opalg.unitary_exp(
        _nv_hamiltonian(spec, realization, 'y', spec.omega_y), spec.tau2)
    return opalg.UnitaryOperator(y_drive.matrix.dot(x_drive.matrix))


_Model = collections.namedtuple(
    '_Model', ['tag', 'validate', 'sample', 'build', 'period', 'axis',
               'initial_sign'])

_MODELS = {
    KhemaniSpec: _Model('khemani', _validate_khemani, _sample_khemani,
                        build_floquet_khemani, lambda s: s.t1 + s.t2, 'x', 1),
    MinimalSpec: _Model('minimal', _validate_minimal, _sample_minimal,
                        build_floquet_minimal, lambda s: s.t1 + s.t2, 'z', 1),
    ElseSpec: _Model('else', _validate_else, _sample_else, build_floquet_else,
                     lambda s: s.t1 + s.t2, 'z', 1),
    YaoSpec: _Model('yao', _validate_yao, _sample_yao, build_floquet_yao,
                    lambda s: s.t1 + s.t2, 'z', 1),
    IonSpec: _Model('ion', _validate_ion, _sample_ion, build_floquet_ion,
                    lambda s: s.t1 + s.t2 + s.t3, 'x', -1),
    NVSpec: _Model('nv', _validate_nv, _sample_nv, build_floquet_nv,
                   lambda s: s.tau1 + s.tau2, 'x', 1),
}


def _model(spec):
    try:
        return _MODELS[type(spec)]
    except KeyError:
        raise SpecError('Not a spin model spec: %r' % (spec,))


def model_tag(spec):
    return _model(spec).tag


def spec_class(tag):
    """Returns the spec namedtuple class registered under a model tag."""
    for spec_type, model in _MODELS.items():
        if model.tag == tag:
            return spec_type
    raise SpecError('Unknown spin model: %s' % tag)


def sample_realization(spec, seed):
    """Draws the disorder of a spec deterministically from a seed.

    Every value comes from its own counter-based stream keyed by site, bond
    or pair, so a realization at one chain length shares its draws with
    realizations at other lengths.
    """
    model = _model(spec)
    model.validate(spec)
    return model.sample(spec, seed)


def build_floquet(spec, realization):
    return _model(spec).build(spec, realization)


def period(spec):
    return _model(spec).period(spec)


def observable(spec):
    """Chain-averaged magnetization along the model's ordering axis."""
    axis = _model(spec).axis
    dim = 2**spec.L
    matrix = np.zeros((dim, dim), dtype=complex)
    for i in range(spec.L):
        opalg.add_pauli_term(matrix, spec.L, {i: axis}, 1.0 / spec.L)
    return opalg.HermitianOperator(matrix)


def initial_state(spec):
    """Fully polarized product state along the model's ordering axis."""
    model = _model(spec)
    return opalg.product_state(spec.L, model.axis, model.initial_sign)


def ising_parity(L, axis='z'):
    """Product of sigma^axis over every site."""
    return opalg.pauli_string(L, {i: axis for i in range(L)})
