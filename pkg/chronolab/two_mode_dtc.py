"""Two-mode Floquet model of bouncing bosons: cat states and their gaps.

States are amplitude vectors over the Fock basis |n1, N - n1> of the two
resonant Floquet modes u1, u2, indexed by n1. The wave-packet modes
phi_1,2 = (u1 +- u2) / sqrt(2) are localized in time; a Fock state
|k, N - k> of the wave-packet modes puts k bosons in phi_1.
"""

import collections
import logging

import mpmath
import numpy as np
from scipy import linalg
from scipy import special

from chronolab import opalg
from chronolab import result_store

logger = logging.getLogger(__name__)

CONDENSATE = 'condensate'
CAT = 'cat'

# Relative size below which double precision cannot resolve a level splitting.
DOUBLE_PRECISION_GAP_FLOOR = 1e-14

# Cat states have a number-difference variance of order N^2.
_CAT_VARIANCE_FRACTION = 0.25
_MARGINAL_WINDOW = 0.1
_MIN_OUTCOME_PROBABILITY = 1e-15


class Error(Exception):
    pass


class ParameterError(Error):
    """Indicates invalid model parameters or scan settings."""


class MeasurementError(Error):
    """Indicates a measurement outcome with zero probability."""


# g0N is carried along for bookkeeping of the mean-field constant g0 N.
TwoModeParams = collections.namedtuple('TwoModeParams',
                                       ['J', 'U', 'U12', 'N', 'g0N'],
                                       defaults=(None,))

TwoModeState = collections.namedtuple('TwoModeState',
                                      ['particles', 'amplitudes'])

GroundClassification = collections.namedtuple(
    'GroundClassification',
    ['phase', 'variance', 'marginal', 'wave_packet_occupations'])

GapScaling = collections.namedtuple(
    'GapScaling',
    ['particles', 'gaps', 'slope', 'intercept', 'r_squared', 'excluded'])

CollapseResult = collections.namedtuple(
    'CollapseResult', ['probability', 'state', 'times', 'branch_trace'])


def pair_coupling(params):
    """g = (U - 2 U12) / 4."""
    return 0.25 * (params.U - 2.0 * params.U12)


def params_at_ratio(ratio, particles, J=1.0, U12=0.0):
    """Parameters with N (U - 2 U12) = ratio * J held at the given value.

    Negative ratios below -1 select the cat regime.
    """
    return TwoModeParams(J=J,
                         U=2.0 * U12 + ratio * J / particles,
                         U12=U12,
                         N=particles,
                         g0N=ratio * J)


def _validate(params):
    if params.N < 2:
        raise ParameterError('Need at least 2 particles: %d' % params.N)
    if params.J <= 0:
        raise ParameterError('Tunneling energy must be positive: %g' %
                             params.J)


def build_two_mode(params):
    """H = -(J/2)(n1 - n2) + g [(c1^dag)^2 c2^2 + (c2^dag)^2 c1^2 + 2 n1 n2]."""
    _validate(params)
    operators = opalg.fock_operators(opalg.FockBasis(2, params.N))
    n1 = operators.number(0)
    n2 = operators.number(1)
    g = pair_coupling(params)
    h = (-0.5 * params.J * (n1 - n2) + g *
         (operators.pair(0, 0, 1, 1) + operators.pair(1, 1, 0, 0) +
          2.0 * n1.dot(n2)))
    return opalg.HermitianOperator(h)


def wave_packet_transform(particles):
    """Orthogonal matrix W with W[n, k] = <n, N - n | k, N - k>_wave-packet.

    Column k expresses the wave-packet Fock state with k bosons in phi_1 in
    the u-mode basis. Entries are Krawtchouk polynomials, summed exactly in
    integers before the final scaling.
    """
    if particles < 0:
        raise ParameterError('Particle number is negative: %d' % particles)
    N = particles
    comb = [special.comb(N, k, exact=True) for k in range(N + 1)]
    transform = np.zeros((N + 1, N + 1))
    for k in range(N + 1):
        for n in range(N + 1):
            total = 0
            for j in range(max(0, n - (N - k)), min(k, n) + 1):
                sign = -1 if (N - k - n + j) % 2 else 1
                total += (sign * special.comb(k, j, exact=True) *
                          special.comb(N - k, n - j, exact=True))
            transform[n, k] = (float(total) * 2.0**(-0.5 * N) *
                               np.sqrt(comb[k] / float(comb[n])))
    return transform


def to_wave_packet_basis(state):
    return wave_packet_transform(state.particles).T.dot(state.amplitudes)


def from_wave_packet_basis(particles, amplitudes):
    return TwoModeState(
        particles=particles,
        amplitudes=wave_packet_transform(particles).dot(amplitudes))


def ideal_cat(particles):
    """(|N, 0> + |0, N>) / sqrt(2) in the wave-packet modes."""
    amplitudes = np.zeros(particles + 1, dtype=complex)
    amplitudes[0] = amplitudes[particles] = 1.0 / np.sqrt(2.0)
    return from_wave_packet_basis(particles, amplitudes)


def wave_packet_occupations(state):
    """Probability of each wave-packet Fock state |k, N - k>."""
    return np.abs(to_wave_packet_basis(state))**2


def number_difference_variance(state):
    """Variance of n_1 - n_2 counted in the wave-packet modes."""
    probabilities = wave_packet_occupations(state)
    difference = 2.0 * np.arange(state.particles + 1) - state.particles
    mean = np.sum(probabilities * difference)
    return np.sum(probabilities * difference**2) - mean**2


def _sectors(particles):
    """Indices with an even and with an odd number of bosons in u2."""
    n2 = particles - np.arange(particles + 1)
    return np.flatnonzero(n2 % 2 == 0), np.flatnonzero(n2 % 2 == 1)


def sector_ground_states(params):
    """Lowest level of the even and of the odd u2-occupation sector.

    The pair term changes n2 by two, so the Hamiltonian never mixes the two
    sectors. Deep in the cat regime the two states are the even and odd
    cat combinations.

    Returns:
        ((energy, TwoModeState) for the even sector, same for the odd one).
    """
    h = build_two_mode(params).matrix
    grounds = []
    for indices in _sectors(params.N):
        values, vectors = linalg.eigh(h[np.ix_(indices, indices)])
        amplitudes = np.zeros(params.N + 1, dtype=complex)
        amplitudes[indices] = vectors[:, 0]
        grounds.append((values[0],
                        TwoModeState(particles=params.N,
                                     amplitudes=amplitudes)))
    return tuple(grounds)


def classify_ground(params):
    """Classifies the ground state as a condensate or a cat state.

    Cat states have a wave-packet number-difference variance above N^2 / 4.
    Parameters within 10% of the boundary N |U - 2 U12| = J are flagged as
    marginal.
    """
    even, odd = sector_ground_states(params)
    _, ground = min(even, odd, key=lambda pair: pair[0])
    variance = number_difference_variance(ground)
    phase = CAT if variance > _CAT_VARIANCE_FRACTION * params.N**2 else (
        CONDENSATE)
    strength = params.N * abs(params.U - 2.0 * params.U12)
    marginal = abs(strength - params.J) <= _MARGINAL_WINDOW * params.J
    if marginal:
        logger.warning('N |U - 2 U12| = %g is within %d%% of J = %g; '
                       'classification %s is marginal', strength,
                       int(100 * _MARGINAL_WINDOW), params.J, phase)
    return GroundClassification(
        phase=phase,
        variance=variance,
        marginal=marginal,
        wave_packet_occupations=wave_packet_occupations(ground))


def wave_packet_tridiagonal(params):
    """Diagonal and off-diagonal of H in the wave-packet Fock basis.

    There the pair term is g ((n_1 - n_2)^2 - N) and the tunneling term
    hops one boson between the packets.
    """
    _validate(params)
    N = params.N
    k = np.arange(N + 1)
    diagonal = pair_coupling(params) * ((2.0 * k - N)**2 - N)
    off = -0.5 * params.J * np.sqrt((k[:-1] + 1.0) * (N - k[:-1]))
    return diagonal, off


def _sturm_count(diagonal, off_squared, x, tiny):
    """Number of eigenvalues below x of a symmetric tridiagonal matrix."""
    count = 0
    q = diagonal[0] - x
    for i in range(len(diagonal)):
        if i:
            q = diagonal[i] - x - off_squared[i - 1] / q
        if q == 0:
            q = tiny
        if q < 0:
            count += 1
    return count


def _bisect_eigenvalue(diagonal, off_squared, index, lower, upper, tolerance,
                       tiny):
    while upper - lower > tolerance:
        middle = (lower + upper) / 2
        if _sturm_count(diagonal, off_squared, middle, tiny) > index:
            upper = middle
        else:
            lower = middle
    return (lower + upper) / 2


def _precise_gap(params, digits):
    diagonal, off = wave_packet_tridiagonal(params)
    with mpmath.workdps(digits):
        d = [mpmath.mpf(float(v)) for v in diagonal]
        b = [mpmath.mpf(float(v)) for v in off]
        off_squared = [v * v for v in b]
        bound = max(abs(v) for v in d) + 2 * max(abs(v) for v in b)
        tolerance = bound * mpmath.mpf(10)**(-(digits - 10))
        tiny = mpmath.mpf(10)**(-2 * digits)
        e0 = _bisect_eigenvalue(d, off_squared, 0, -bound, bound, tolerance,
                                tiny)
        e1 = _bisect_eigenvalue(d, off_squared, 1, -bound, bound, tolerance,
                                tiny)
        return float(e1 - e0), float(tolerance)


def tunneling_gap(params, precise=True):
    """Splitting between the two lowest levels.

    Args:
        params: TwoModeParams.
        precise: If True, bisect Sturm sequences of the wave-packet
            tridiagonal form in extended precision, raising the working
            precision until the gap is resolved. If False, use a double
            precision tridiagonal eigensolver; gaps below gap_floor(params)
            are then unreliable.
    """
    if not precise:
        diagonal, off = wave_packet_tridiagonal(params)
        values = linalg.eigh_tridiagonal(diagonal,
                                         off,
                                         eigvals_only=True,
                                         select='i',
                                         select_range=(0, 1))
        gap = values[1] - values[0]
        if gap < gap_floor(params):
            logger.warning('Gap %g at N=%d is below the double precision '
                           'floor', gap, params.N)
        return gap
    digits = 30 + params.N
    while True:
        gap, tolerance = _precise_gap(params, digits)
        if gap > 1e6 * tolerance:
            return gap
        logger.debug('Gap %g at N=%d unresolved with %d digits', gap,
                     params.N, digits)
        digits *= 2


def gap_floor(params):
    """Smallest splitting resolvable in double precision.

    1e-14 times the Gershgorin bound on the spectrum, and never below 1e-14.
    """
    diagonal, off = wave_packet_tridiagonal(params)
    scale = np.max(np.abs(diagonal)) + 2.0 * np.max(np.abs(off))
    return DOUBLE_PRECISION_GAP_FLOOR * max(1.0, scale)


def _is_resolved(gap, params, precise):
    if precise:
        return gap > 0
    return gap >= gap_floor(params)


def gap_scaling(ratio, particle_numbers, J=1.0, U12=0.0, precise=True):
    """Fits log(1 / gap) against N at fixed N (U - 2 U12) / J.

    Returns:
        A GapScaling; excluded lists particle numbers whose gaps could not
        be resolved and were left out of the fit.

    Raises:
        ParameterError unless the particle numbers ascend and at least two
        gaps enter the fit.
    """
    particles = list(particle_numbers)
    if any(b <= a for a, b in zip(particles, particles[1:])):
        raise ParameterError('Particle numbers must ascend: %s' % particles)
    gaps = []
    resolved = []
    for n in particles:
        params = params_at_ratio(ratio, n, J, U12)
        gaps.append(tunneling_gap(params, precise))
        resolved.append(_is_resolved(gaps[-1], params, precise))
        logger.info('N=%d: gap %.6g', n, gaps[-1])
    gaps = np.array(gaps)
    resolved = np.array(resolved)
    excluded = [n for n, ok in zip(particles, resolved) if not ok]
    if excluded:
        logger.warning('Excluding unresolved gaps at N=%s from the fit',
                       excluded)
    if np.count_nonzero(resolved) < 2:
        raise ParameterError('Need at least 2 resolved gaps to fit, got %d' %
                             np.count_nonzero(resolved))
    x = np.array(particles, dtype=float)[resolved]
    y = -np.log(gaps[resolved])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    total = np.sum((y - np.mean(y))**2)
    r_squared = 1.0 - np.sum((y - fitted)**2) / total if total else 1.0
    return GapScaling(particles=particles,
                      gaps=gaps,
                      slope=slope,
                      intercept=intercept,
                      r_squared=r_squared,
                      excluded=excluded)


def write_gap_scaling(path, scaling):
    gaps = np.asarray(scaling.gaps)
    with np.errstate(divide='ignore'):
        log_inverse = -np.log(gaps)
    return result_store.write_table(path, ['N', 'gap', 'log_inv_gap'],
                                    [scaling.particles, gaps, log_inverse])


def branch_probability(state, mode):
    """Probability that wave-packet mode 0 or 1 holds most of the bosons.

    A perfectly balanced Fock state counts half towards each branch.
    """
    probabilities = wave_packet_occupations(state)
    k = np.arange(state.particles + 1)
    held = k if mode == 0 else state.particles - k
    weights = np.where(2 * held > state.particles, 1.0,
                       np.where(2 * held == state.particles, 0.5, 0.0))
    return np.sum(weights * probabilities)


def measure(state, mode):
    """Detects one boson in wave-packet mode 0 or 1.

    Returns:
        (probability, post-measurement TwoModeState with N - 1 bosons).

    Raises:
        MeasurementError if the outcome cannot occur.
    """
    if mode not in (0, 1):
        raise ParameterError('Wave-packet mode must be 0 or 1: %r' % mode)
    opalg.check_normalized(state.amplitudes)
    N = state.particles
    if N < 1:
        raise MeasurementError('No boson left to detect')
    amplitudes = to_wave_packet_basis(state)
    k = np.arange(N + 1)
    held = k if mode == 0 else N - k
    probability = np.sum(held * np.abs(amplitudes)**2) / N
    if probability < _MIN_OUTCOME_PROBABILITY:
        raise MeasurementError('Outcome %d has probability %g' %
                               (mode, probability))
    # b_1 |k, N-k> = sqrt(k) |k-1, N-k>; b_2 |k, N-k> = sqrt(N-k) |k, N-k-1>.
    projected = np.sqrt(held) * amplitudes
    projected = projected[1:] if mode == 0 else projected[:-1]
    projected /= np.linalg.norm(projected)
    return probability, from_wave_packet_basis(N - 1, projected)


def _evolution(params, particles):
    h = build_two_mode(params._replace(N=particles))
    return opalg.eig_hermitian(h)


def _evolve(eigensystem, state, t):
    values, vectors = eigensystem
    coefficients = vectors.conj().T.dot(state.amplitudes)
    return TwoModeState(particles=state.particles,
                        amplitudes=vectors.dot(
                            np.exp(-1j * values * t) * coefficients))


def collapse_evolve(params, state, mode, times):
    """Measures one boson, then evolves the collapsed state.

    Args:
        params: TwoModeParams; N is replaced by the post-measurement count.
        state: Normalized TwoModeState.
        mode: Wave-packet mode in which the boson is detected.
        times: Evolution times at which the branch probability is sampled.

    Returns:
        A CollapseResult with the outcome probability, the collapsed state
        and the branch probability of the evolved state at each time.
    """
    probability, collapsed = measure(state, mode)
    eigensystem = _evolution(params, collapsed.particles)
    trace = [
        branch_probability(_evolve(eigensystem, collapsed, t), mode)
        for t in times
    ]
    return CollapseResult(probability=probability,
                          state=collapsed,
                          times=np.asarray(times, dtype=float),
                          branch_trace=np.array(trace))


def repeated_measurements(params, state, mode, count, interval):
    """Alternates single-boson detections in one mode with free evolution.

    Returns:
        Branch probability of the chosen mode after each evolution interval.
    """
    if count < 1:
        raise ParameterError('Need at least one measurement: %d' % count)
    if state.particles - count < 2:
        raise ParameterError('%d measurements leave fewer than 2 of %d bosons'
                             % (count, state.particles))
    branch = []
    for _ in range(count):
        _, state = measure(state, mode)
        state = _evolve(_evolution(params, state.particles), state, interval)
        branch.append(branch_probability(state, mode))
    return np.array(branch)
