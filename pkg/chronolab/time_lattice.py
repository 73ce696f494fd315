"""Crystalline and disordered structures in the time domain.

Resonantly driven systems observed at a fixed position behave like particles
on a lattice whose sites are consecutive drive periods. This module builds
the effective lattice models and their observables: tight-binding rings and
Anderson localization in time, secular pendulum bands, the phase-space
crystal of a resonantly driven oscillator, the driven quantum bouncer and a
Bose-Hubbard model of bosons hopping between time cells.
"""

import collections
import logging

import numpy as np
from scipy import integrate
from scipy import special

from chronolab import floquet_observables
from chronolab import opalg
from chronolab import random_streams

logger = logging.getLogger(__name__)

# Localization fits ignore densities this far below the peak.
LLOYD_DENSITY_FLOOR = 1e-24
RING_DENSITY_FLOOR = 1e-20

LLOYD_MIN_R_SQUARED = 0.8
RING_MIN_R_SQUARED = 0.9

# Two-point correlation C(d) / C(0) = exp(-1/2) defines the correlation length.
_CORRELATION_LEVEL = np.exp(-0.5)

_MIN_BOUNCER_STEPS = 256
_PACKET_WIDTH = 1.5
_PACKET_PHASES = 32
_MIN_PACKET_COVERAGE = 0.6
_TRUNCATION_EDGE = 0.95
_TRUNCATION_WEIGHT = 1e-8


class Error(Exception):
    pass


class ParameterError(Error):
    """Indicates an invalid lattice or drive parameter."""


class TruncationError(Error):
    """Indicates a basis too small for the requested potential."""


class ResonanceNotFoundError(Error):
    """Indicates that no resonant Floquet multiplet was identified."""


# Sites j and j + 1 (mod s) are coupled by -J_j / 2.
TightBindingRing = collections.namedtuple('TightBindingRing',
                                          ['hoppings', 'energies', 'period'],
                                          defaults=(1.0,))

LocalizationFit = collections.namedtuple('LocalizationFit',
                                         ['length', 'r_squared', 'accepted'])

# Detection probability at a fixed position; values repeat after recurrence.
TimeProfile = collections.namedtuple('TimeProfile',
                                     ['times', 'values', 'recurrence'])

LloydResult = collections.namedtuple('LloydResult', [
    'ring', 'energies', 'vectors', 'fits', 'window', 'fit_length',
    'transfer_length', 'time_length'
])

DisorderedRingSpec = collections.namedtuple(
    'DisorderedRingSpec', ['V0', 'k0', 'K', 'omega', 'seed'])

# harmonics[k - 1] is the normalized coefficient c_k of exp(i k theta);
# drive_harmonics holds the drive Fourier components f_-k that produce it.
EffectivePotential = collections.namedtuple('EffectivePotential', [
    'theta', 'values', 'harmonics', 'drive_harmonics', 'correlation_length',
    'truncated'
])

RingAndersonResult = collections.namedtuple(
    'RingAndersonResult',
    ['spec', 'potential', 'momenta', 'energies', 'vectors', 'fits'])

PendulumSpec = collections.namedtuple('PendulumSpec',
                                      ['mass', 'V0', 's', 'cutoff'],
                                      defaults=(20,))

BandStructure = collections.namedtuple('BandStructure',
                                       ['quasi_momenta', 'energies'])

PhaseCrystalSpec = collections.namedtuple('PhaseCrystalSpec',
                                          ['s', 'mu', 'lam', 'n_max'])

# sectors[m] holds the ascending eigenvalues of the states with n = m mod s;
# flagged[m] marks eigenvalues whose states reach the truncation edge.
PhaseCrystalSpectrum = collections.namedtuple(
    'PhaseCrystalSpectrum', ['spec', 'matrix', 'sectors', 'flagged'])

BouncerSpec = collections.namedtuple(
    'BouncerSpec', ['lam', 'omega', 's', 'basis_size', 'steps_per_period'],
    defaults=(2, None, 512))

BouncerBasis = collections.namedtuple(
    'BouncerBasis', ['energies', 'position', 'resonant_level'])

BouncerResult = collections.namedtuple('BouncerResult', [
    'basis', 'monodromy', 'spectrum', 'resonant_states', 'splitting',
    'packets', 'exchange_overlap'
])

BoseHubbardTimeSpec = collections.namedtuple('BoseHubbardTimeSpec',
                                             ['s', 'J', 'U', 'N'])

MottReport = collections.namedtuple('MottReport', [
    'energies', 'ground_state', 'gap', 'number_variance', 'coherence'
])


def _r_squared(x, y, slope, intercept):
    total = np.sum((y - np.mean(y))**2)
    if total == 0:
        return 0.0
    return 1.0 - np.sum((y - (slope * x + intercept))**2) / total


def fit_localization(density, spacing, floor, min_r_squared, max_length):
    """Fits density ~ exp(-d / l) around the density maximum on a ring.

    The fit runs on the decreasing envelope max{density(x) : dist(x) >= d},
    which bridges nodes and single-site dips, over distances where the
    envelope stays above floor times the peak.

    Returns:
        A LocalizationFit; accepted requires a decaying fit with the given
        quality and a length no larger than max_length.
    """
    density = np.asarray(density, dtype=float)
    points = len(density)
    center = int(np.argmax(density))
    offset = (np.arange(points) - center) % points
    distance = np.minimum(offset, points - offset)
    per_distance = np.zeros(points // 2 + 1)
    np.maximum.at(per_distance, distance, density)
    envelope = np.maximum.accumulate(per_distance[::-1])[::-1]
    d = np.arange(len(envelope))
    usable = (d >= 1) & (envelope >= floor * density[center])
    if np.count_nonzero(usable) < 3:
        return LocalizationFit(length=np.inf, r_squared=0.0, accepted=False)
    x = d[usable] * spacing
    y = np.log(envelope[usable])
    slope, intercept = np.polyfit(x, y, 1)
    r_squared = _r_squared(x, y, slope, intercept)
    length = -1.0 / slope if slope < 0 else np.inf
    accepted = bool(slope < 0 and r_squared >= min_r_squared and
                    length <= max_length)
    return LocalizationFit(length=length,
                           r_squared=r_squared,
                           accepted=accepted)


# Tight-binding rings.


def clean_ring(s, J, period=1.0):
    return TightBindingRing(hoppings=np.full(s, float(J)),
                            energies=np.zeros(s),
                            period=period)


def _ring_matrix(ring):
    energies = np.asarray(ring.energies, dtype=float)
    hoppings = np.asarray(ring.hoppings)
    s = len(energies)
    if s < 2:
        raise ParameterError('Ring needs at least 2 sites: %d' % s)
    if len(hoppings) != s:
        raise ParameterError('Ring of %d sites needs %d hoppings, got %d' %
                             (s, s, len(hoppings)))
    h = np.diag(energies).astype(complex)
    for j in range(s):
        h[(j + 1) % s, j] += -0.5 * hoppings[j]
        h[j, (j + 1) % s] += -0.5 * np.conj(hoppings[j])
    return h


def tb_ring_eigensystem(ring):
    """Eigenvalues (ascending) and eigenvectors of a tight-binding ring."""
    return opalg.eig_hermitian(_ring_matrix(ring))


def lorentzian_energies(seed, s, gamma):
    """On-site energies gamma tan(pi (u - 1/2)) with u uniform per site."""
    u = random_streams.uniform(seed, 'lloyd.energies', range(s), (0.0, 1.0))
    return gamma * np.tan(np.pi * (u - 0.5))


def lloyd_exact_length(J, gamma, energy):
    """Localization length of the density in the infinite Lloyd model.

    With hopping -J/2 the Lyapunov exponent obeys
    cosh(lambda) = [sqrt((J + E)^2 + gamma^2) + sqrt((J - E)^2 + gamma^2)]
    / (2 J), and the density decays as exp(-2 lambda d).
    """
    energy = np.asarray(energy, dtype=float)
    cosh = (np.sqrt((J + energy)**2 + gamma**2) +
            np.sqrt((J - energy)**2 + gamma**2)) / (2.0 * J)
    return 1.0 / (2.0 * np.arccosh(cosh))


def transfer_matrix_length(J, onsite, energies):
    """Density localization length 1 / (2 lambda) from transfer matrices.

    Iterates psi_{j+1} = 2 (eps_j - E) / J psi_j - psi_{j-1} along the given
    chain for every energy at once, renormalizing each step.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    previous = np.zeros_like(energies)
    current = np.ones_like(energies)
    growth = np.zeros_like(energies)
    for eps in onsite:
        following = 2.0 * (eps - energies) / J * current - previous
        scale = np.maximum(np.abs(following), np.abs(current))
        growth += np.log(scale)
        previous, current = current / scale, following / scale
    return len(onsite) / (2.0 * growth)


def lloyd_localization(s, J, gamma, seed, period=1.0, window=0.5,
                       transfer_sites=10000):
    """Eigenstates of a Lloyd ring and two estimates of their localization.

    Every eigenstate gets an exponential fit of its density. Fits of states
    with |E| <= window J are compared with transfer-matrix lengths at the
    same energies on an independent chain drawn from the same distribution.

    Returns:
        A LloydResult. fit_length and transfer_length are medians over the
        accepted window states (nan if there are none); time_length is
        fit_length converted to time with one site per drive period.
    """
    if s < 2:
        raise ParameterError('Ring needs at least 2 sites: %d' % s)
    if gamma < 0:
        raise ParameterError('Lorentzian width must be non-negative: %g' %
                             gamma)
    ring = TightBindingRing(hoppings=np.full(s, float(J)),
                            energies=lorentzian_energies(seed, s, gamma),
                            period=period)
    energies, vectors = tb_ring_eigensystem(ring)
    fits = [
        fit_localization(np.abs(vectors[:, n])**2, 1.0, LLOYD_DENSITY_FLOOR,
                         LLOYD_MIN_R_SQUARED, s / 4.0) for n in range(s)
    ]
    window_states = [
        n for n in range(s) if abs(energies[n]) <= window * J and
        fits[n].accepted
    ]
    if not window_states:
        logger.warning('No localized states near the band center (seed %d)',
                       seed)
        fit_length = transfer_length = np.nan
    else:
        u = random_streams.generator(seed,
                                     'lloyd.transfer').uniform(
                                         size=transfer_sites)
        chain = gamma * np.tan(np.pi * (u - 0.5))
        fit_length = np.median([fits[n].length for n in window_states])
        transfer_length = np.median(
            transfer_matrix_length(J, chain, energies[window_states]))
    return LloydResult(ring=ring,
                       energies=energies,
                       vectors=vectors,
                       fits=fits,
                       window=window_states,
                       fit_length=fit_length,
                       transfer_length=transfer_length,
                       time_length=fit_length * period)


def time_profile(ring, vector, repeats=2):
    """Detection probability per drive period at a fixed position.

    Site j of the ring is visited in period j, so the profile repeats with
    period s T.
    """
    density = np.abs(np.asarray(vector))**2
    s = len(density)
    values = np.tile(density, repeats)
    return TimeProfile(times=np.arange(s * repeats) * ring.period,
                       values=values,
                       recurrence=s * ring.period)


# Disordered ring.


def _fourier_sawtooth(k):
    """Fourier coefficient g_k = i (-1)^k / (pi k) of the periodic ramp."""
    return 1j * (-1.0)**k / (np.pi * k)


def _grid_points(K):
    return max(256, int(2**np.ceil(np.log2(8 * K))))


def _correlation_length(values, spacing):
    centered = values - np.mean(values)
    spectrum = np.abs(np.fft.fft(centered))**2
    correlation = np.real(np.fft.ifft(spectrum))
    correlation /= correlation[0]
    below = np.flatnonzero(correlation[:len(values) // 2] < _CORRELATION_LEVEL)
    if not len(below):
        return np.inf
    i = below[0]
    fraction = ((correlation[i - 1] - _CORRELATION_LEVEL) /
                (correlation[i - 1] - correlation[i]))
    return (i - 1 + fraction) * spacing


def effective_potential(spec, points=None):
    """Samples U(theta) = V0 sum_{0 < |k| <= K} c_k exp(i k theta).

    |c_k| follows exp(-k^2 / (2 k0^2)) and the phases of c_k are uniform,
    drawn per harmonic; c_-k = conj(c_k) keeps U real. The coefficients are
    scaled so that the standard deviation of U over the ring equals V0.
    """
    if spec.K < 1:
        raise ParameterError('Need at least one harmonic: %d' % spec.K)
    if spec.k0 <= 0:
        raise ParameterError('Correlation scale must be positive: %g' %
                             spec.k0)
    truncated = spec.K < 3 * spec.k0
    if truncated:
        logger.warning('K=%d < 3 k0=%g truncates the harmonic envelope',
                       spec.K, 3 * spec.k0)
    if points is None:
        points = _grid_points(spec.K)
    if points <= 2 * spec.K:
        raise TruncationError('%d grid points cannot resolve %d harmonics' %
                              (points, spec.K))
    k = np.arange(1, spec.K + 1)
    magnitudes = np.exp(-k**2 / (2.0 * spec.k0**2))
    magnitudes /= np.sqrt(2.0 * np.sum(magnitudes**2))
    phases = random_streams.uniform(spec.seed, 'ring.phases', k,
                                    (0.0, 2.0 * np.pi))
    harmonics = magnitudes * np.exp(1j * phases)
    spectrum = np.zeros(points, dtype=complex)
    spectrum[k] = harmonics
    spectrum[-k] = np.conj(harmonics)
    values = spec.V0 * points * np.fft.ifft(spectrum)
    if np.max(np.abs(values.imag)) > 1e-12 * max(1.0, abs(spec.V0)):
        raise opalg.ContractViolationError('Potential is not real')
    values = values.real
    spacing = 2.0 * np.pi / points
    return EffectivePotential(theta=np.arange(points) * spacing,
                              values=values,
                              harmonics=harmonics,
                              drive_harmonics=harmonics / _fourier_sawtooth(k),
                              correlation_length=_correlation_length(
                                  values, spacing),
                              truncated=truncated)


def cross_correlation_peak(a, b):
    """Largest normalized circular cross-correlation of two sampled fields."""
    a = np.asarray(a, dtype=float) - np.mean(a)
    b = np.asarray(b, dtype=float) - np.mean(b)
    correlation = np.real(np.fft.ifft(np.fft.fft(a) * np.conj(np.fft.fft(b))))
    return np.max(np.abs(correlation)) / (len(a) * np.std(a) * np.std(b))


def _plane_wave_density(coefficients, momenta, points):
    spectrum = np.zeros(points, dtype=complex)
    spectrum[momenta % points] = coefficients
    return np.abs(points * np.fft.ifft(spectrum))**2 / (2.0 * np.pi)


def ring_anderson(spec, cutoff, V0=None):
    """Eigenstates of P^2 / 2 + U(theta) in the frame moving with the drive.

    Args:
        spec: DisorderedRingSpec.
        cutoff: Largest plane-wave momentum |m| in the basis.
        V0: Optional amplitude replacing spec.V0.

    Returns:
        A RingAndersonResult with a localization fit per eigenstate.

    Raises:
        TruncationError if cutoff < 4 K.
    """
    if V0 is not None:
        spec = spec._replace(V0=V0)
    if cutoff < 4 * spec.K:
        raise TruncationError('Plane-wave cutoff %d is below 4 K = %d' %
                              (cutoff, 4 * spec.K))
    potential = effective_potential(spec)
    momenta = np.arange(-cutoff, cutoff + 1)
    coupling = np.zeros(2 * spec.K + 1, dtype=complex)
    coupling[spec.K + 1:] = potential.harmonics
    coupling[:spec.K] = np.conj(potential.harmonics[::-1])
    difference = momenta[:, np.newaxis] - momenta[np.newaxis, :]
    h = np.zeros((len(momenta), len(momenta)), dtype=complex)
    near = np.abs(difference) <= spec.K
    h[near] = spec.V0 * coupling[difference[near] + spec.K]
    h[np.diag_indices_from(h)] = 0.5 * momenta**2
    energies, vectors = opalg.eig_hermitian(h)
    points = int(2**np.ceil(np.log2(4 * len(momenta))))
    fits = []
    for n in range(len(energies)):
        density = _plane_wave_density(vectors[:, n], momenta, points)
        fits.append(
            fit_localization(density, 2.0 * np.pi / points,
                             RING_DENSITY_FLOOR, RING_MIN_R_SQUARED,
                             np.pi / 2))
    logger.info('Ring Anderson model: %d of %d states localized',
                sum(f.accepted for f in fits), len(fits))
    return RingAndersonResult(spec=spec,
                              potential=potential,
                              momenta=momenta,
                              energies=energies,
                              vectors=vectors,
                              fits=fits)


def state_density(result, index, points=None):
    """|psi(theta)|^2 of an eigenstate on a uniform grid."""
    if points is None:
        points = int(2**np.ceil(np.log2(4 * len(result.momenta))))
    return _plane_wave_density(result.vectors[:, index], result.momenta,
                               points)


def localized_fraction(result, energy_cut):
    """Fraction of eigenstates below energy_cut with accepted fits."""
    below = [f for e, f in zip(result.energies, result.fits)
             if e < energy_cut]
    if not below:
        return np.nan
    return sum(f.accepted for f in below) / float(len(below))


def ring_time_profile(result, index, theta0, samples_per_period=64,
                      periods=2):
    """Lab-frame detection probability |psi(theta0 - omega t)|^2.

    Sample n is taken at t = n T / samples_per_period with T = 2 pi / omega.
    """
    omega = result.spec.omega
    if omega <= 0:
        raise ParameterError('Drive frequency must be positive: %g' % omega)
    n = np.arange(samples_per_period * periods)
    angles = theta0 - 2.0 * np.pi * (n % samples_per_period) / float(
        samples_per_period)
    psi = np.exp(1j * np.outer(angles, result.momenta)).dot(
        result.vectors[:, index]) / np.sqrt(2.0 * np.pi)
    recurrence = 2.0 * np.pi / omega
    return TimeProfile(times=n * recurrence / samples_per_period,
                       values=np.abs(psi)**2,
                       recurrence=recurrence)


# Secular pendulum bands.


def secular_bands(spec, quasi_momenta=None, bands=None):
    """Bloch bands of P^2 / 2m + V0 cos(s theta).

    Momentum q + s n couples to q + s (n +- 1) with V0 / 2. Quasi-momenta
    default to 65 points across the reduced zone [-s/2, s/2].

    Returns:
        A BandStructure with energies[i, b] the band b energy at
        quasi_momenta[i].
    """
    if spec.mass <= 0:
        raise ParameterError('Effective mass must be positive: %g' %
                             spec.mass)
    if quasi_momenta is None:
        quasi_momenta = np.linspace(-0.5 * spec.s, 0.5 * spec.s, 65)
    quasi_momenta = np.asarray(quasi_momenta, dtype=float)
    n = np.arange(-spec.cutoff, spec.cutoff + 1)
    if bands is None:
        bands = spec.cutoff
    energies = np.zeros((len(quasi_momenta), bands))
    off = np.full(len(n) - 1, 0.5 * spec.V0)
    for i, q in enumerate(quasi_momenta):
        h = (np.diag((q + spec.s * n)**2 / (2.0 * spec.mass)) + np.diag(
            off, 1) + np.diag(off, -1))
        energies[i] = opalg.eig_hermitian(h)[0][:bands]
    return BandStructure(quasi_momenta=quasi_momenta, energies=energies)


def band_gaps(structure):
    """Gap between each band's maximum and the next band's minimum."""
    energies = structure.energies
    return np.min(energies[:, 1:], axis=0) - np.max(energies[:, :-1], axis=0)


# Phase-space crystal.


def phase_crystal_matrix(spec):
    """g = (r^2 + lam - 1)^2 / 4 + (mu / 2) [(r e^{i theta})^s + h.c.].

    In the number basis r^2 = lam (2 n + 1) and r e^{i theta} =
    sqrt(2 lam) a^dag, so the drive couples n to n + s with
    (mu / 2) (2 lam)^{s/2} sqrt((n + 1) ... (n + s)).
    """
    if spec.lam <= 0:
        raise ParameterError('Effective Planck constant must be positive: %g'
                             % spec.lam)
    if spec.s < 1 or spec.n_max < spec.s:
        raise ParameterError('Need n_max >= s >= 1, got n_max=%d, s=%d' %
                             (spec.n_max, spec.s))
    n = np.arange(spec.n_max + 1)
    g = np.diag(0.25 * (2.0 * spec.lam * (n + 1) - 1.0)**2)
    lower = n[:-spec.s]
    ladder = np.exp(0.5 * (special.gammaln(lower + spec.s + 1) -
                           special.gammaln(lower + 1)))
    coupling = 0.5 * spec.mu * (2.0 * spec.lam)**(0.5 * spec.s) * ladder
    g[lower + spec.s, lower] = coupling
    g[lower, lower + spec.s] = coupling
    return g


def rwa_phase_crystal(spec):
    """Eigenvalues of the phase-crystal Hamiltonian per n mod s sector."""
    g = phase_crystal_matrix(spec)
    n = np.arange(spec.n_max + 1)
    edge = n >= _TRUNCATION_EDGE * spec.n_max
    sectors = []
    flagged = []
    for m in range(spec.s):
        indices = np.flatnonzero(n % spec.s == m)
        values, vectors = opalg.eig_hermitian(g[np.ix_(indices, indices)])
        weight = np.sum(np.abs(vectors[edge[indices], :])**2, axis=0)
        sectors.append(values)
        flagged.append(weight > _TRUNCATION_WEIGHT)
    count = sum(np.count_nonzero(f) for f in flagged)
    if count:
        logger.warning('%d phase-crystal levels reach the truncation edge',
                       count)
    return PhaseCrystalSpectrum(spec=spec,
                                matrix=g,
                                sectors=sectors,
                                flagged=flagged)


def crystal_band(spectrum, band):
    """Eigenvalue number band of every sector, ordered by sector m."""
    return np.array([values[band] for values in spectrum.sectors])


def translation_operator(spec):
    """exp(-i 2 pi n / s), the discrete rotation the crystal commutes with."""
    n = np.arange(spec.n_max + 1)
    return np.diag(np.exp(-2j * np.pi * n / spec.s))


# Driven quantum bouncer.


def bouncer_energies(count):
    """Levels of -d^2/dz^2 / 2 + z above a hard wall: -a_n / 2^(1/3)."""
    zeros = special.ai_zeros(count)[0]
    return -zeros / 2.0**(1.0 / 3.0)


def _resonant_level(energies, omega, s):
    spacing = np.diff(energies)
    return int(np.argmin(np.abs(spacing - omega / s)))


def bouncer_basis(spec):
    """Unperturbed bouncer levels and the position matrix between them.

    Eigenfunctions Ai(z / alpha + a_n), alpha = 2^(-1/3), are sampled on a
    fine grid and normalized there; matrix elements of z use Simpson's rule.
    """
    if spec.omega <= 0 or spec.s < 1:
        raise ParameterError('Need omega > 0 and s >= 1, got %g and %d' %
                             (spec.omega, spec.s))
    level = _resonant_level(bouncer_energies(400), spec.omega, spec.s)
    size = spec.basis_size
    if size is None:
        size = 4 * (level + 1)
    if size < 4 * (level + 1):
        raise ParameterError(
            'Basis of %d levels is below 4x the resonant level %d' %
            (size, level + 1))
    zeros = special.ai_zeros(size)[0]
    energies = -zeros / 2.0**(1.0 / 3.0)
    alpha = 2.0**(-1.0 / 3.0)
    z = np.linspace(0.0, energies[-1] + 15.0, 128 * size + 1)
    psi = special.airy(z[np.newaxis, :] / alpha + zeros[:, np.newaxis])[0]
    psi /= np.sqrt(integrate.simpson(psi**2, x=z, axis=1))[:, np.newaxis]
    position = np.zeros((size, size))
    for n in range(size):
        position[n] = integrate.simpson(psi[n] * z * psi, x=z, axis=1)
    position = 0.5 * (position + position.T)
    return BouncerBasis(energies=energies,
                        position=position,
                        resonant_level=level)


def bouncer_monodromy(spec, basis=None):
    """Evolution over one period of H0 + lam z cos(omega t).

    A midpoint exponential per step approximates the time-ordered product.
    """
    if spec.steps_per_period < _MIN_BOUNCER_STEPS:
        raise ParameterError('Need at least %d steps per period, got %d' %
                             (_MIN_BOUNCER_STEPS, spec.steps_per_period))
    if basis is None:
        basis = bouncer_basis(spec)
    period = 2.0 * np.pi / spec.omega
    dt = period / spec.steps_per_period
    h0 = np.diag(basis.energies)
    u = np.eye(len(basis.energies), dtype=complex)
    for step in range(spec.steps_per_period):
        t = (step + 0.5) * dt
        h = h0 + spec.lam * np.cos(spec.omega * t) * basis.position
        u = opalg.unitary_exp(h, dt).matrix.dot(u)
    return opalg.UnitaryOperator(u, tolerance=1e-8), period


def _packet(basis, width, tau):
    n = np.arange(len(basis.energies))
    amplitudes = np.exp(-(n - basis.resonant_level)**2 / (4.0 * width**2))
    amplitudes = amplitudes * np.exp(-1j * basis.energies * tau)
    return amplitudes / np.linalg.norm(amplitudes)


def _spacing_deviation(phases, omega, s):
    """Largest deviation of consecutive quasi-energy gaps from omega / s."""
    offsets = np.sort(np.mod(phases - phases[0], omega))
    gaps = np.diff(np.append(offsets, omega))
    return np.max(np.abs(gaps - omega / s))


def bouncer_floquet(spec, tolerance=0.1):
    """Finds the resonant Floquet multiplet and its Wannier-like packets.

    Gaussian packets over the levels around the resonance are launched at
    phases along the resonant orbit; at the best phase, the s Floquet states
    carrying most of the packet form the multiplet if their quasi-energies
    are spaced by omega / s within tolerance * omega / s. The splitting J is
    the largest deviation from that spacing.

    Raises:
        ResonanceNotFoundError if no phase gives such a multiplet carrying
        at least 60% of a packet.
    """
    basis = bouncer_basis(spec)
    monodromy, period = bouncer_monodromy(spec, basis)
    spectrum = floquet_observables.quasi_spectrum(monodromy, period)
    orbit = spec.s * period
    best = None
    for tau in np.arange(_PACKET_PHASES) * orbit / _PACKET_PHASES:
        packet = _packet(basis, _PACKET_WIDTH, tau)
        weights = spectrum.vectors.conj().T.dot(packet)
        chosen = np.argsort(-np.abs(weights)**2)[:spec.s]
        coverage = np.sum(np.abs(weights[chosen])**2)
        deviation = _spacing_deviation(spectrum.phases[chosen], spec.omega,
                                       spec.s)
        if deviation > tolerance * spec.omega / spec.s:
            continue
        if best is None or coverage > best[0]:
            best = (coverage, chosen, weights[chosen], deviation)
    if best is None or best[0] < _MIN_PACKET_COVERAGE:
        raise ResonanceNotFoundError(
            'No %d-state resonant multiplet near level %d (best coverage %s)'
            % (spec.s, basis.resonant_level + 1,
               'none' if best is None else '%.3f' % best[0]))
    coverage, chosen, weights, splitting = best
    order = np.argsort(np.mod(spectrum.phases[chosen] -
                              spectrum.phases[chosen[0]], spec.omega))
    chosen = chosen[order]
    phases = np.exp(1j * np.angle(weights[order]))
    states = spectrum.vectors[:, chosen] * phases
    j = np.arange(spec.s)
    packets = [
        states.dot(np.exp(-2j * np.pi * j * k / spec.s)) / np.sqrt(spec.s)
        for k in range(spec.s)
    ]
    evolved = monodromy.matrix.dot(packets[0])
    exchange = abs(np.vdot(packets[1 % spec.s], evolved))
    logger.info('Resonant multiplet covers %.3f of the packet; splitting '
                '%.3g, exchange overlap %.4f', coverage, splitting, exchange)
    return BouncerResult(basis=basis,
                         monodromy=monodromy,
                         spectrum=spectrum,
                         resonant_states=chosen,
                         splitting=splitting,
                         packets=packets,
                         exchange_overlap=exchange)


# Bose-Hubbard model in the time domain.


def uniform_interactions(s, onsite, offsite=0.0):
    u = np.full((s, s), float(offsite))
    np.fill_diagonal(u, onsite)
    return u


def _validate_bose_hubbard(spec):
    if spec.s < 2:
        raise ParameterError('Need at least 2 time cells: %d' % spec.s)
    if spec.N < 1:
        raise ParameterError('Need at least 1 boson: %d' % spec.N)
    u = np.asarray(spec.U, dtype=float)
    if u.shape != (spec.s, spec.s):
        raise ParameterError('Interaction matrix must be %dx%d, got %s' %
                             (spec.s, spec.s, u.shape))
    if not np.allclose(u, u.T):
        raise ParameterError('Interaction matrix must be symmetric')
    diagonal = np.abs(np.diag(u))
    offsite = np.abs(u - np.diag(np.diag(u)))
    for i in range(spec.s):
        if np.any(offsite[i] >= diagonal[i]) and np.any(offsite[i] > 0):
            raise ParameterError(
                'On-site interaction U_%d%d must dominate row %d' % (i, i, i))
    return u


def bose_hubbard_matrix(spec):
    """Bose-Hubbard Hamiltonian on a ring of time cells.

    H = -(J/2) sum (a_{i+1}^dag a_i + h.c.)
        + 1/2 sum U_ij a_i^dag a_j^dag a_j a_i.

    The fixed-N Fock basis conserves the particle number by construction.
    """
    u = _validate_bose_hubbard(spec)
    operators = opalg.fock_operators(opalg.FockBasis(spec.s, spec.N))
    dim = operators.basis.dim
    h = np.zeros((dim, dim), dtype=complex)
    for i in range(spec.s):
        hop = operators.hop((i + 1) % spec.s, i)
        h += -0.5 * spec.J * (hop + hop.conj().T)
    for i in range(spec.s):
        for j in range(spec.s):
            if u[i, j]:
                h += 0.5 * u[i, j] * operators.pair(i, j, j, i)
    return opalg.HermitianOperator(h), operators


def bose_hubbard_time(spec, levels=4):
    """Ground state, gap, number fluctuations and coherence of the model."""
    h, operators = bose_hubbard_matrix(spec)
    energies, vectors = opalg.eig_hermitian(h)
    ground = vectors[:, 0]
    occupations = operators.basis.occupations()
    probabilities = np.abs(ground)**2
    mean = probabilities.dot(occupations)
    variance = probabilities.dot(occupations**2) - mean**2
    coherence = np.zeros((spec.s, spec.s), dtype=complex)
    for i in range(spec.s):
        for j in range(spec.s):
            coherence[i, j] = np.vdot(ground, operators.hop(i, j).dot(ground))
    gap = energies[1] - energies[0] if len(energies) > 1 else np.inf
    return MottReport(energies=energies[:levels],
                      ground_state=ground,
                      gap=gap,
                      number_variance=variance,
                      coherence=coherence)
