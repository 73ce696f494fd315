"""Mean-field bosons on a unit ring: ground states, solitons and currents."""

import collections
import logging

import numpy as np

from chronolab import result_store

logger = logging.getLogger(__name__)

# Uniform states are stable above this interaction strength.
SOLITON_THRESHOLD = -np.pi**2

# Density contrast (max / mean) above which a state counts as localized.
BROKEN_SYMMETRY_CONTRAST = 1.01

_ENERGY_SLACK = 1e-13
_MIN_TIME_STEP = 1e-12


class Error(Exception):
    pass


class DomainError(Error):
    """Indicates a parameter outside the domain of a ring calculation."""


class ConvergenceError(Error):
    """Indicates an imaginary-time solve that did not reach its tolerance."""

    def __init__(self, message, residual, state):
        super(ConvergenceError, self).__init__(message)
        self.residual = residual
        self.state = state


# gamma is g0 (N - 1); flux is the gauge parameter alpha entering the kinetic
# term as (p - alpha)^2 / 2.
GPEParams = collections.namedtuple(
    'GPEParams',
    ['gamma', 'flux', 'time_step', 'tolerance', 'max_iterations'],
    defaults=(0.0, 0.5, 1e-9, 20000))

# amplitudes satisfy sum |phi|^2 / M = 1; energies lists the energy after
# every accepted imaginary-time step.
MeanFieldState = collections.namedtuple(
    'MeanFieldState', ['grid', 'amplitudes', 'mu', 'energies', 'residual'])


class RingGrid(object):
    """M equally spaced points x_k = k / M on a ring of unit length."""

    def __init__(self, points):
        if points < 32:
            raise DomainError('Ring grid needs at least 32 points: %d' %
                              points)
        if points & (points - 1):
            logger.warning('Ring grid size %d is not a power of two', points)
        self._points = points

    @property
    def points(self):
        return self._points

    @property
    def spacing(self):
        return 1.0 / self._points

    @property
    def positions(self):
        return np.arange(self._points) / float(self._points)

    @property
    def wavenumbers(self):
        return 2.0 * np.pi * np.fft.fftfreq(self._points, d=self.spacing)

    def __eq__(self, other):
        return isinstance(other, RingGrid) and other.points == self.points

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self._points)


def _inner(a, b):
    return np.sum(np.conj(a) * b) / len(a)


def _normalize(amplitudes):
    return amplitudes / np.sqrt(np.real(_inner(amplitudes, amplitudes)))


def _kinetic_symbol(grid, flux):
    return 0.5 * (grid.wavenumbers - flux)**2


def _apply_kinetic(amplitudes, symbol):
    return np.fft.ifft(symbol * np.fft.fft(amplitudes))


def _energy(amplitudes, symbol, gamma):
    kinetic = np.real(_inner(amplitudes, _apply_kinetic(amplitudes,
                                                        symbol)))
    density = np.abs(amplitudes)**2
    return kinetic + 0.5 * gamma * np.mean(density**2)


def _residual(amplitudes, symbol, gamma):
    """Returns (mu, H phi - mu phi) for the Gross-Pitaevskii operator H."""
    h_phi = (_apply_kinetic(amplitudes, symbol) +
             gamma * np.abs(amplitudes)**2 * amplitudes)
    mu = np.real(_inner(amplitudes, h_phi))
    return mu, h_phi - mu * amplitudes


def _residual_norm(residual):
    return np.sqrt(np.real(_inner(residual, residual)))


def _check_gamma(gamma):
    if not np.isfinite(gamma):
        raise DomainError('Interaction strength must be finite: %r' % gamma)


def initial_amplitudes(grid):
    """Uniform state with a small cos(2 pi x) seed for symmetry breaking."""
    return _normalize(1.0 + 0.1 * np.cos(2.0 * np.pi * grid.positions) +
                      0j)


def gpe_ground_state(params, grid, amplitudes=None):
    """Relaxes the Gross-Pitaevskii functional in imaginary time.

    Each step solves the kinetic part implicitly in Fourier space and the
    shifted potential part explicitly in real space:

        phi' = phi - (1/dtau + K + c)^-1 (H - mu) phi

    then renormalizes. The fixed point is an exact discrete eigenstate, so
    the residual |(H - mu) phi| can be driven to round-off. A step that
    raises the energy is discarded and dtau halved.

    Args:
        params: GPEParams.
        grid: RingGrid.
        amplitudes: Optional starting amplitudes; defaults to
            initial_amplitudes(grid).

    Returns:
        A MeanFieldState with residual <= params.tolerance.

    Raises:
        DomainError if gamma is not finite or the tolerance not positive.
        ConvergenceError if max_iterations steps do not reach the tolerance.
    """
    _check_gamma(params.gamma)
    if params.tolerance <= 0:
        raise DomainError('Tolerance must be positive: %g' % params.tolerance)
    if params.time_step <= 0:
        raise DomainError('Time step must be positive: %g' % params.time_step)
    symbol = _kinetic_symbol(grid, params.flux)
    if amplitudes is None:
        amplitudes = initial_amplitudes(grid)
    phi = _normalize(np.asarray(amplitudes, dtype=complex))
    energy = _energy(phi, symbol, params.gamma)
    energies = [energy]
    step = params.time_step
    for iteration in range(params.max_iterations):
        mu, residual_vector = _residual(phi, symbol, params.gamma)
        residual = _residual_norm(residual_vector)
        if residual <= params.tolerance:
            logger.info('Ground state at gamma=%g converged after %d steps '
                        '(mu=%.10g)', params.gamma, iteration, mu)
            return MeanFieldState(grid=grid,
                                  amplitudes=phi,
                                  mu=mu,
                                  energies=tuple(energies),
                                  residual=residual)
        shift = max(0.0, np.max(params.gamma * np.abs(phi)**2) - mu) + 1.0
        update = np.fft.ifft(
            np.fft.fft(residual_vector) / (1.0 / step + symbol + shift))
        candidate = _normalize(phi - update)
        candidate_energy = _energy(candidate, symbol, params.gamma)
        if candidate_energy > energy + _ENERGY_SLACK * max(1.0, abs(energy)):
            step /= 2.0
            logger.debug('Energy rose to %.15g at step %d, time step now %g',
                         candidate_energy, iteration, step)
            if step < _MIN_TIME_STEP:
                break
            continue
        phi, energy = candidate, candidate_energy
        energies.append(energy)
    mu, residual_vector = _residual(phi, symbol, params.gamma)
    state = MeanFieldState(grid=grid,
                           amplitudes=phi,
                           mu=mu,
                           energies=tuple(energies),
                           residual=_residual_norm(residual_vector))
    raise ConvergenceError(
        'Ground state at gamma=%g did not converge: residual %g > %g' %
        (params.gamma, state.residual, params.tolerance), state.residual,
        state)


def _ring_distance(positions, center):
    offset = np.mod(positions - center, 1.0)
    return np.minimum(offset, 1.0 - offset)


def soliton_profile(gamma, x_cm, grid):
    """Normalized bright soliton sech(|gamma| d / 2) around x_cm.

    d is the distance along the ring, so the profile wraps around.

    Raises:
        DomainError if gamma is not negative.
    """
    _check_gamma(gamma)
    if gamma >= 0:
        raise DomainError('Bright solitons need attractive interactions: %g' %
                          gamma)
    distance = _ring_distance(grid.positions, x_cm)
    phi = _normalize(1.0 / np.cosh(0.5 * abs(gamma) * distance) + 0j)
    mu, residual_vector = _residual(phi, _kinetic_symbol(grid, 0.0), gamma)
    return MeanFieldState(grid=grid,
                          amplitudes=phi,
                          mu=mu,
                          energies=(),
                          residual=_residual_norm(residual_vector))


def density(state):
    return np.abs(state.amplitudes)**2


def density_contrast(state):
    """Ratio of the maximum to the mean density; 1 for a uniform state."""
    values = density(state)
    return np.max(values) / np.mean(values)


def overlap(a, b):
    """|<a|b>| with the ring inner product sum conj(a) b / M."""
    if a.grid != b.grid:
        raise DomainError('States live on different grids: %d and %d points'
                          % (a.grid.points, b.grid.points))
    return abs(_inner(a.amplitudes, b.amplitudes))


def half_max_width(state):
    """Full width at half maximum of |phi|, interpolated between points."""
    magnitude = np.abs(state.amplitudes)
    points = len(magnitude)
    centered = np.roll(magnitude, points // 2 - int(np.argmax(magnitude)))
    peak = points // 2
    half = 0.5 * centered[peak]

    def crossing(direction):
        index = peak
        while 0 < index < points - 1 and centered[index] >= half:
            index += direction
        inside = centered[index - direction]
        fraction = (inside - half) / (inside - centered[index])
        return abs(index - direction - peak) + fraction

    if np.all(centered >= half):
        raise DomainError('State has no half-maximum crossing')
    return (crossing(1) + crossing(-1)) * state.grid.spacing


def probability_current(state, flux=0.0):
    """Mean velocity <p - flux> per particle of a mean-field state."""
    wavenumbers = state.grid.wavenumbers
    weights = np.abs(np.fft.fft(state.amplitudes))**2
    return np.sum((wavenumbers - flux) * weights) / np.sum(weights)


def cm_current(j, particles, flux):
    """Center-of-mass velocity 2 pi j / N - flux of momentum branch j."""
    if particles < 1:
        raise DomainError('Particle number must be positive: %d' % particles)
    return 2.0 * np.pi * j / particles - flux


def rotation_period(flux):
    """Period 1 / (2 pi - flux) of the rotating symmetry-broken density."""
    velocity = 2.0 * np.pi - flux
    if velocity == 0:
        raise DomainError('Density does not rotate at flux 2 pi')
    return 1.0 / abs(velocity)


def cm_spreading(sigma0, particles, t):
    """Width of a free center-of-mass packet of mass N.

    Returns:
        (sigma(t), t_c) where sigma(t) = sigma0 sqrt(1 + (t / (N sigma0^2))^2)
        and t_c is the time at which the width reaches the ring length (zero
        if the packet starts wider than the ring).
    """
    if sigma0 <= 0:
        raise DomainError('Initial width must be positive: %g' % sigma0)
    if particles < 1:
        raise DomainError('Particle number must be positive: %d' % particles)
    scale = particles * sigma0**2
    sigma = sigma0 * np.sqrt(1.0 + (np.asarray(t, dtype=float) / scale)**2)
    if sigma0 >= 1.0:
        return sigma, 0.0
    return sigma, particles * sigma0 * np.sqrt(1.0 - sigma0**2)


def is_symmetry_broken(state):
    return density_contrast(state) > BROKEN_SYMMETRY_CONTRAST


def _relaxed_state(params, grid):
    try:
        return gpe_ground_state(params, grid)
    except ConvergenceError as ex:
        # Close to the bifurcation relaxation slows down; the partially
        # relaxed density still tells the two branches apart.
        logger.warning('Using unconverged state at gamma=%g (residual %g)',
                       params.gamma, ex.residual)
        return ex.state


def find_threshold(grid, lower=-20.0, upper=-5.0, resolution=1e-2,
                   template=None):
    """Bisects for the interaction strength where the uniform state breaks.

    Args:
        grid: RingGrid.
        lower: Interaction strength with a localized ground state.
        upper: Interaction strength with a uniform ground state.
        resolution: Width of the final bracket.
        template: GPEParams supplying solver settings; gamma is replaced.

    Returns:
        The midpoint of the final bracket.

    Raises:
        DomainError if the initial bracket does not straddle the threshold.
    """
    if template is None:
        template = GPEParams(gamma=upper)

    def broken(gamma):
        return is_symmetry_broken(
            _relaxed_state(template._replace(gamma=gamma), grid))

    if not lower < upper:
        raise DomainError('Bracket is empty: [%g, %g]' % (lower, upper))
    if not broken(lower) or broken(upper):
        raise DomainError('Bracket [%g, %g] does not contain the threshold' %
                          (lower, upper))
    while upper - lower > resolution:
        middle = 0.5 * (lower + upper)
        if broken(middle):
            lower = middle
        else:
            upper = middle
        logger.debug('Threshold bracket [%.6g, %.6g]', lower, upper)
    threshold = 0.5 * (lower + upper)
    logger.info('Symmetry-breaking threshold at gamma=%.6g', threshold)
    return threshold


def write_state(path, state):
    """Writes a state as CSV columns x, re, im, density."""
    return result_store.write_table(
        path, ['x', 're', 'im', 'density'], [
            state.grid.positions, state.amplitudes.real,
            state.amplitudes.imag,
            density(state)
        ])
