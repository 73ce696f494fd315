"""Dense complex operator algebra for spin chains and bosonic modes."""

import logging
import os

import numpy as np
from scipy import linalg
from scipy import special

logger = logging.getLogger(__name__)

DEFAULT_MAX_DIMENSION = 2**14

_HERMITIAN_TOLERANCE = 1e-12
_UNITARY_TOLERANCE = 1e-10
_NORM_TOLERANCE = 1e-10

PAULI = {
    'x': np.array([[0, 1], [1, 0]], dtype=complex),
    'y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'z': np.array([[1, 0], [0, -1]], dtype=complex),
}

_SINGLE_SPIN_STATES = {
    ('z', 1): np.array([1, 0], dtype=complex),
    ('z', -1): np.array([0, 1], dtype=complex),
    ('x', 1): np.array([1, 1], dtype=complex) / np.sqrt(2),
    ('x', -1): np.array([1, -1], dtype=complex) / np.sqrt(2),
    ('y', 1): np.array([1, 1j], dtype=complex) / np.sqrt(2),
    ('y', -1): np.array([1, -1j], dtype=complex) / np.sqrt(2),
}


class Error(Exception):
    pass


class CapacityError(Error):
    """Indicates an operator larger than the configured Hilbert dimension."""


class ContractViolationError(Error):
    """Indicates an input that breaks an algebraic precondition."""


class EmptyInputError(Error):
    """Indicates an operation on a zero-dimensional operator."""


class SiteIndexError(Error, IndexError):
    """Indicates a site index outside the chain."""


def max_dimension():
    """Returns the largest Hilbert dimension that may be built.

    The CHRONO_MAX_DIM environment variable can lower the default cap of
    2^14 but never raise it.
    """
    raw = os.environ.get('CHRONO_MAX_DIM')
    if not raw:
        return DEFAULT_MAX_DIMENSION
    try:
        limit = int(raw)
    except ValueError:
        logger.warning('Ignoring non-integer CHRONO_MAX_DIM: %s', raw)
        return DEFAULT_MAX_DIMENSION
    if not (1 <= limit <= DEFAULT_MAX_DIMENSION):
        logger.warning('Ignoring CHRONO_MAX_DIM outside [1, %d]: %d',
                       DEFAULT_MAX_DIMENSION, limit)
        return DEFAULT_MAX_DIMENSION
    return limit


def check_dimension(dim):
    limit = max_dimension()
    if dim > limit:
        raise CapacityError(
            'Hilbert dimension %d exceeds the configured maximum of %d' %
            (dim, limit))


def _matrix_of(operand):
    if isinstance(operand, (HermitianOperator, UnitaryOperator)):
        return operand.matrix
    return np.asarray(operand, dtype=complex)


def _square_matrix(matrix):
    m = np.array(_matrix_of(matrix), dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ContractViolationError('Operator must be a square matrix: %s' %
                                     (m.shape,))
    check_dimension(m.shape[0])
    if not np.all(np.isfinite(m)):
        raise ContractViolationError('Operator has non-finite entries')
    m.setflags(write=False)
    return m


class HermitianOperator(object):
    """A read-only Hermitian matrix."""

    def __init__(self, matrix):
        m = _square_matrix(matrix)
        if m.size:
            scale = np.max(np.abs(m))
            deviation = np.max(np.abs(m - m.conj().T))
            if deviation > _HERMITIAN_TOLERANCE * scale:
                raise ContractViolationError(
                    'Operator is not Hermitian: |M - M^dag|_max = %g' %
                    deviation)
        self._matrix = m

    @property
    def matrix(self):
        return self._matrix

    @property
    def dim(self):
        return self._matrix.shape[0]


class UnitaryOperator(object):
    """A read-only unitary matrix."""

    def __init__(self, matrix, tolerance=_UNITARY_TOLERANCE):
        m = _square_matrix(matrix)
        if not m.size:
            raise EmptyInputError('Unitary operator cannot be empty')
        deviation = np.max(np.abs(m.conj().T.dot(m) - np.eye(m.shape[0])))
        if deviation > tolerance:
            raise ContractViolationError(
                'Operator is not unitary: |U^dag U - I|_max = %g' % deviation)
        self._matrix = m

    @property
    def matrix(self):
        return self._matrix

    @property
    def dim(self):
        return self._matrix.shape[0]


def kron(a, b):
    """Tensor product of two matrices or operators.

    Raises:
        CapacityError if the product exceeds the maximum dimension.
    """
    a = _matrix_of(a)
    b = _matrix_of(b)
    check_dimension(max(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]))
    return np.kron(a, b)


def _check_site(chain_length, site):
    if not (0 <= site < chain_length):
        raise SiteIndexError('Site %d is outside a chain of %d spins' %
                             (site, chain_length))


def _check_chain(chain_length):
    if chain_length < 1:
        raise ContractViolationError('Chain needs at least one spin: %d' %
                                     chain_length)
    check_dimension(2**chain_length)


def site_bits(chain_length, site):
    """Occupation bit of a site for every computational basis index.

    Site 0 is the leftmost tensor factor, so it maps to the most significant
    bit of the basis index.
    """
    _check_site(chain_length, site)
    indices = np.arange(2**chain_length)
    return (indices >> (chain_length - 1 - site)) & 1


def add_pauli_term(matrix, chain_length, ops, coefficient):
    """Adds coefficient * (Pauli string) to a dense matrix in place.

    A Pauli string maps each basis state to a single basis state, so the
    term is written column by column without forming tensor products.

    Args:
        matrix: Writable complex array of shape (2^L, 2^L).
        chain_length: Number of spins L.
        ops: Mapping of site index to axis ('x', 'y' or 'z').
        coefficient: Complex prefactor of the term.
    """
    columns = np.arange(2**chain_length)
    rows = columns.copy()
    phases = np.ones(columns.size, dtype=complex)
    for site, axis in ops.items():
        _check_site(chain_length, site)
        mask = 1 << (chain_length - 1 - site)
        sign = 1 - 2 * ((columns & mask) != 0)
        if axis == 'x':
            rows ^= mask
        elif axis == 'y':
            rows ^= mask
            phases *= 1j * sign
        elif axis == 'z':
            phases *= sign
        else:
            raise ContractViolationError('Unknown Pauli axis: %s' % axis)
    matrix[rows, columns] += coefficient * phases


def pauli_string(chain_length, ops):
    """Returns the Hermitian operator of a Pauli string.

    Args:
        chain_length: Number of spins L (at most 14).
        ops: Mapping of site index to axis.
    """
    _check_chain(chain_length)
    dim = 2**chain_length
    matrix = np.zeros((dim, dim), dtype=complex)
    add_pauli_term(matrix, chain_length, ops, 1.0)
    return HermitianOperator(matrix)


def pauli_site(chain_length, site, axis):
    """Returns I x ... x sigma_axis x ... x I acting on site."""
    _check_chain(chain_length)
    _check_site(chain_length, site)
    return pauli_string(chain_length, {site: axis})


def z_diagonal(chain_length, sites):
    """Diagonal of the product of sigma_z over sites, as a real vector."""
    _check_chain(chain_length)
    diagonal = np.ones(2**chain_length)
    for site in sites:
        diagonal *= 1 - 2 * site_bits(chain_length, site)
    return diagonal


def rotation(axis, angle):
    """Single-spin unitary exp(-i angle sigma_axis)."""
    return np.cos(angle) * np.eye(2) - 1j * np.sin(angle) * PAULI[axis]


def local_rotations(matrices):
    """Tensor product of per-site 2x2 unitaries as a UnitaryOperator."""
    result = np.ones((1, 1), dtype=complex)
    for matrix in matrices:
        result = kron(result, matrix)
    return UnitaryOperator(result)


def product_state(chain_length, axis='z', sign=1):
    """Product state with every spin along +axis (sign=1) or -axis."""
    _check_chain(chain_length)
    single = _SINGLE_SPIN_STATES[(axis, sign)]
    state = np.ones(1, dtype=complex)
    for _ in range(chain_length):
        state = np.kron(state, single)
    return state


def basis_state(dim, index):
    state = np.zeros(dim, dtype=complex)
    state[index] = 1.0
    return state


def check_normalized(state):
    """Raises ContractViolationError unless the state has unit norm."""
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > _NORM_TOLERANCE:
        raise ContractViolationError('State is not normalized: norm = %.15g'
                                     % norm)


def eig_hermitian(h):
    """Eigenvalues in ascending order and orthonormal eigenvectors.

    Raises:
        EmptyInputError if the operator has dimension zero.
    """
    if not isinstance(h, HermitianOperator):
        h = HermitianOperator(h)
    if h.dim == 0:
        raise EmptyInputError('Cannot diagonalize an empty operator')
    return linalg.eigh(h.matrix)


def unitary_exp(h, t):
    """Returns exp(-i H t) through the eigendecomposition of H."""
    values, vectors = eig_hermitian(h)
    phases = np.exp(-1j * values * t)
    return UnitaryOperator((vectors * phases).dot(vectors.conj().T))


def eig_unitary(u, period):
    """Quasi-energies in [0, 2 pi / period) and the matching eigenvectors.

    The eigenpairs come from a complex Schur decomposition; for a unitary
    matrix the triangular factor is diagonal up to round-off, and each
    accepted pair must satisfy |U v - lambda v| <= 1e-9 * dim.

    Returns:
        (quasi_energies, vectors) with quasi-energies sorted ascending and
        vectors[:, n] the eigenvector of quasi_energies[n].
    """
    if not isinstance(u, UnitaryOperator):
        u = UnitaryOperator(u)
    if period <= 0:
        raise ContractViolationError('Period must be positive: %g' % period)
    triangular, vectors = linalg.schur(u.matrix, output='complex')
    eigenvalues = np.diag(triangular)
    residual = np.max(
        np.abs(u.matrix.dot(vectors) - vectors * eigenvalues[np.newaxis, :]))
    if residual > 1e-9 * u.dim:
        raise ContractViolationError(
            'Eigenpair residual %g exceeds tolerance' % residual)
    eigenvalues = eigenvalues / np.abs(eigenvalues)
    zone = 2.0 * np.pi / period
    quasi_energies = np.mod(-np.angle(eigenvalues) / period, zone)
    quasi_energies[np.isclose(quasi_energies, zone, rtol=0.0,
                              atol=1e-13 * zone)] = 0.0
    order = np.argsort(quasi_energies, kind='stable')
    return quasi_energies[order], vectors[:, order]


def _compositions(particles, modes):
    if modes == 1:
        yield (particles,)
        return
    for first in range(particles + 1):
        for rest in _compositions(particles - first, modes - 1):
            yield (first,) + rest


class FockBasis(object):
    """Occupation-number states of bosons in M modes at fixed N.

    States are enumerated in ascending lexicographic order, so for two modes
    the state (n1, N - n1) has index n1.
    """

    def __init__(self, modes, particles):
        if modes < 1:
            raise ContractViolationError('Need at least one mode: %d' % modes)
        if particles < 0:
            raise ContractViolationError('Particle number is negative: %d' %
                                         particles)
        check_dimension(
            special.comb(particles + modes - 1, modes - 1, exact=True))
        self._modes = modes
        self._particles = particles
        self._states = tuple(_compositions(particles, modes))
        self._index = {state: i for i, state in enumerate(self._states)}

    @property
    def modes(self):
        return self._modes

    @property
    def particles(self):
        return self._particles

    @property
    def states(self):
        return self._states

    @property
    def dim(self):
        return len(self._states)

    def index(self, occupations):
        return self._index[tuple(occupations)]

    def occupations(self):
        """Array of shape (dim, modes) holding every basis state."""
        return np.array(self._states, dtype=float).reshape(self.dim,
                                                           self._modes)


def _apply_ladder(state, ladder):
    """Applies ladder operators right to left to one Fock state.

    Args:
        state: Occupation tuple.
        ladder: Sequence of (mode, +1 for creation or -1 for annihilation),
            written in operator order, so the last entry acts first.

    Returns:
        (amplitude, new_state), or (0.0, None) if the state is annihilated.
    """
    occupations = list(state)
    amplitude = 1.0
    for mode, direction in reversed(ladder):
        if direction < 0:
            if occupations[mode] == 0:
                return 0.0, None
            amplitude *= np.sqrt(occupations[mode])
            occupations[mode] -= 1
        else:
            occupations[mode] += 1
            amplitude *= np.sqrt(occupations[mode])
    return amplitude, tuple(occupations)


class FockOperators(object):
    """Dense ladder-operator bilinears on a fixed-N Fock basis."""

    def __init__(self, basis):
        self._basis = basis

    @property
    def basis(self):
        return self._basis

    def _check_mode(self, mode):
        if not (0 <= mode < self._basis.modes):
            raise SiteIndexError('Mode %d is outside %d modes' %
                                 (mode, self._basis.modes))

    def _sector_map(self, ladder, target):
        for mode, _ in ladder:
            self._check_mode(mode)
        matrix = np.zeros((target.dim, self._basis.dim), dtype=complex)
        for column, state in enumerate(self._basis.states):
            amplitude, image = _apply_ladder(state, ladder)
            if image is not None:
                matrix[target.index(image), column] += amplitude
        return matrix

    def number(self, mode):
        self._check_mode(mode)
        return np.diag(self._basis.occupations()[:, mode]).astype(complex)

    def hop(self, i, j):
        """Matrix of a_i^dag a_j."""
        return self._sector_map([(i, 1), (j, -1)], self._basis)

    def pair(self, i, j, k, l):
        """Matrix of a_i^dag a_j^dag a_k a_l."""
        return self._sector_map([(i, 1), (j, 1), (k, -1), (l, -1)],
                                self._basis)

    def annihilate(self, mode):
        """Matrix of a_mode from this sector to the N-1 sector.

        Returns:
            (matrix, lower_basis).
        """
        if self._basis.particles == 0:
            raise EmptyInputError('Cannot remove a particle from vacuum')
        lower = FockBasis(self._basis.modes, self._basis.particles - 1)
        return self._sector_map([(mode, -1)], lower), lower

    def create(self, mode):
        """Matrix of a_mode^dag from this sector to the N+1 sector.

        Returns:
            (matrix, upper_basis).
        """
        upper = FockBasis(self._basis.modes, self._basis.particles + 1)
        return self._sector_map([(mode, 1)], upper), upper


def fock_operators(basis):
    return FockOperators(basis)
