"""Spectral and stroboscopic diagnostics of Floquet operators."""

import collections
import logging

import numpy as np
from scipy import stats

from chronolab import opalg

logger = logging.getLogger(__name__)

# Half-width of the subharmonic window in cycles per period.
SUBHARMONIC_WINDOW = 0.05

_DEGENERATE_GAP = 1e-14


class Error(Exception):
    pass


class ParameterError(Error):
    """Indicates an invalid diagnostic parameter or input length."""


# phases: quasi-energies ascending in [0, 2 pi / period); vectors may be None
# for spectra drawn from random-matrix oracles.
QuasiSpectrum = collections.namedtuple('QuasiSpectrum',
                                       ['period', 'phases', 'vectors'])

# Stroboscopic samples taken at t = n * period.
TimeSeries = collections.namedtuple('TimeSeries', ['period', 'values'])

DftSpectrum = collections.namedtuple('DftSpectrum',
                                     ['freqs', 'mags', 'n_samples'])

SubharmonicReport = collections.namedtuple(
    'SubharmonicReport',
    ['peak_height', 'peak_center', 'peak_variance', 'locked'])


def zone_width(period):
    return 2.0 * np.pi / period


def quasi_spectrum(u, period):
    phases, vectors = opalg.eig_unitary(u, period)
    return QuasiSpectrum(period=period, phases=phases, vectors=vectors)


def _circular_gaps(spectrum):
    phases = np.sort(np.asarray(spectrum.phases, dtype=float))
    zone = zone_width(spectrum.period)
    return np.append(np.diff(phases), zone - phases[-1] + phases[0])


def r_statistic(spectrum):
    """Mean ratio of adjacent quasi-energy gaps on the circle.

    Gap n separates level n from level n + 1, the last gap wraps around the
    zone, and r_n = min(gap_n, gap_{n-1}) / max(gap_n, gap_{n-1}). Ratios
    touching a degenerate (zero) gap contribute 0.

    Raises:
        ParameterError if the spectrum has fewer than three levels.
    """
    if len(spectrum.phases) < 3:
        raise ParameterError('Need at least 3 levels for gap ratios, got %d' %
                             len(spectrum.phases))
    gaps = _circular_gaps(spectrum)
    previous = np.roll(gaps, 1)
    larger = np.maximum(gaps, previous)
    smaller = np.minimum(gaps, previous)
    degenerate = smaller <= _DEGENERATE_GAP * zone_width(spectrum.period)
    if np.any(degenerate):
        logger.warning('%d of %d gap ratios touch a degenerate gap',
                       np.count_nonzero(degenerate), len(gaps))
    ratios = np.zeros(len(gaps))
    usable = ~degenerate
    ratios[usable] = smaller[usable] / larger[usable]
    return float(np.mean(ratios))


def poisson_spectrum(dim, rng):
    """Independent uniform quasi-energies (localized-phase oracle)."""
    phases = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=dim))
    return QuasiSpectrum(period=1.0, phases=phases, vectors=None)


def coe_spectrum(dim, rng):
    """Eigenphases of a circular-orthogonal-ensemble matrix W = V^T V."""
    v = stats.unitary_group.rvs(dim, random_state=rng)
    eigenvalues = np.linalg.eigvals(v.T.dot(v))
    phases = np.sort(np.mod(-np.angle(eigenvalues), 2.0 * np.pi))
    return QuasiSpectrum(period=1.0, phases=phases, vectors=None)


def participation_ratio(vector):
    """Number of basis states effectively occupied by a vector."""
    weights = np.abs(np.asarray(vector))**2
    weights = weights / np.sum(weights)
    return float(1.0 / np.sum(weights**2))


def omega_grid(period, n_omega):
    """Frequencies -pi/T + (k + 1) * zone / n_omega covering (-pi/T, pi/T]."""
    step = zone_width(period) / n_omega
    return -np.pi / period + step * np.arange(1, n_omega + 1)


def _raising_operator(chain_length, site):
    matrix = np.zeros((2**chain_length, 2**chain_length), dtype=complex)
    opalg.add_pauli_term(matrix, chain_length, {site: 'x'}, 0.5)
    opalg.add_pauli_term(matrix, chain_length, {site: 'y'}, 0.5j)
    return matrix


def _periodic_lorentzian(n_omega, step, eta):
    offsets = np.arange(n_omega)
    distance = step * np.where(offsets <= n_omega // 2, offsets,
                               offsets - n_omega)
    kernel = (eta / np.pi) / (distance**2 + eta**2)
    return kernel / (np.sum(kernel) * step)


def spectral_function(spectrum, site, eta=None, n_omega=512):
    """Spectral function of the spin raising operator on one site.

    A(omega) = 2^-L sum_ab |<a|sigma^+_site|b>|^2 delta(omega - (e_a - e_b))
    with frequency differences wrapped into the zone and every delta replaced
    by a Lorentzian of half-width eta on the periodic omega grid. The kernel
    is normalized on the grid, so sum(A) * d_omega equals the total weight
    Tr(sigma^- sigma^+) / 2^L = 1/2.

    Args:
        spectrum: QuasiSpectrum with eigenvectors of a 2^L dimensional map.
        site: Site carrying the raising operator.
        eta: Lorentzian half-width; defaults to one hundredth of the zone.
        n_omega: Number of grid points.

    Returns:
        (omega, A) arrays of length n_omega.
    """
    zone = zone_width(spectrum.period)
    if eta is None:
        eta = zone / 100.0
    if eta <= 0:
        raise ParameterError('Broadening must be positive: %g' % eta)
    if n_omega < 2:
        raise ParameterError('Grid needs at least 2 points: %d' % n_omega)
    vectors = spectrum.vectors
    if vectors is None:
        raise ParameterError('Spectral function needs eigenvectors')
    dim = vectors.shape[0]
    chain_length = int(round(np.log2(dim)))
    if 2**chain_length != dim:
        raise ParameterError('Dimension %d is not a power of two' % dim)
    raising = vectors.conj().T.dot(_raising_operator(chain_length,
                                                     site)).dot(vectors)
    weights = np.abs(raising)**2 / dim
    phases = np.asarray(spectrum.phases)
    half = np.pi / spectrum.period
    omega = half - np.mod(half - (phases[:, np.newaxis] - phases), zone)
    step = zone / n_omega
    bins = np.mod(np.rint((omega + half) / step).astype(int) - 1, n_omega)
    binned = np.bincount(bins.ravel(),
                         weights=weights.ravel(),
                         minlength=n_omega)
    kernel = _periodic_lorentzian(n_omega, step, eta)
    density = np.real(np.fft.ifft(np.fft.fft(binned) * np.fft.fft(kernel)))
    return omega_grid(spectrum.period, n_omega), density


def magnetization_trace(u, psi0, op, n_periods, period=1.0):
    """Stroboscopic correlator Re <psi0| U^-n op U^n op |psi0>.

    Args:
        u: Floquet operator.
        psi0: Normalized initial state.
        op: Hermitian observable.
        n_periods: Number of samples, n = 0 .. n_periods - 1.
        period: Drive period stored with the series.
    """
    if not isinstance(u, opalg.UnitaryOperator):
        u = opalg.UnitaryOperator(u)
    if not isinstance(op, opalg.HermitianOperator):
        op = opalg.HermitianOperator(op)
    opalg.check_normalized(psi0)
    state = np.asarray(psi0, dtype=complex)
    kicked = op.matrix.dot(state)
    values = np.empty(n_periods)
    for n in range(n_periods):
        values[n] = np.real(np.vdot(state, op.matrix.dot(kicked)))
        state = u.matrix.dot(state)
        kicked = u.matrix.dot(kicked)
    return TimeSeries(period=period, values=values)


def dft_series(ts):
    """One-sided DFT magnitudes |X_k| / N on frequencies in cycles/period."""
    values = np.asarray(ts.values, dtype=float)
    n_samples = len(values)
    if n_samples < 4:
        raise ParameterError('Need at least 4 samples for a DFT, got %d' %
                             n_samples)
    return DftSpectrum(freqs=np.fft.rfftfreq(n_samples),
                       mags=np.abs(np.fft.rfft(values)) / n_samples,
                       n_samples=n_samples)


def subharmonic_peak(dft):
    """Describes the spectral peak near half the drive frequency.

    The height is the largest magnitude within 0.05 cycles/period of 1/2.
    The center is the magnitude-weighted centroid of the bins holding at
    least half that height, and the variance is the magnitude-weighted
    second moment of the whole window about the center. The peak is locked
    when its center sits within one DFT bin of 1/2.
    """
    freqs = np.asarray(dft.freqs)
    mags = np.asarray(dft.mags)
    window = np.abs(freqs - 0.5) <= SUBHARMONIC_WINDOW
    if not np.any(window):
        raise ParameterError('No DFT bins within %g of 1/2' %
                             SUBHARMONIC_WINDOW)
    freqs = freqs[window]
    mags = mags[window]
    height = float(np.max(mags))
    if height == 0.0:
        return SubharmonicReport(peak_height=0.0,
                                 peak_center=0.5,
                                 peak_variance=0.0,
                                 locked=False)
    top = mags >= height / 2.0
    center = float(np.sum(mags[top] * freqs[top]) / np.sum(mags[top]))
    variance = float(np.sum(mags * (freqs - center)**2) / np.sum(mags))
    locked = abs(center - 0.5) <= 1.0 / dft.n_samples
    return SubharmonicReport(peak_height=height,
                             peak_center=center,
                             peak_variance=variance,
                             locked=bool(locked))


def pi_pairing(spectrum, tol):
    """Fraction of levels with a partner at e + pi/T (mod zone) within tol.

    Levels are matched greedily in ascending order, each to the nearest
    still unmatched level.
    """
    if tol <= 0:
        raise ParameterError('Pairing tolerance must be positive: %g' % tol)
    phases = np.asarray(spectrum.phases, dtype=float)
    if not len(phases):
        raise ParameterError('Cannot pair an empty spectrum')
    zone = zone_width(spectrum.period)
    matched = np.zeros(len(phases), dtype=bool)
    for n, phase in enumerate(phases):
        if matched[n]:
            continue
        target = np.mod(phase + zone / 2.0, zone)
        distance = np.abs(phases - target)
        distance = np.minimum(distance, zone - distance)
        distance[matched] = np.inf
        distance[n] = np.inf
        partner = int(np.argmin(distance))
        if distance[partner] <= tol:
            matched[n] = True
            matched[partner] = True
    return float(np.count_nonzero(matched)) / len(phases)
