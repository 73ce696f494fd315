"""Runs catalog experiments and writes their result files.

Each experiment writes JSON envelopes and CSV tables under the config's
output directory followed by manifest.json. Result files never contain wall
time, so reruns with the same config and seed are byte-identical.
"""

import logging
import multiprocessing
import os

import numpy as np

from chronolab import __version__
from chronolab import bosonic_ring
from chronolab import disorder_lab
from chronolab import experiment_config_parser
from chronolab import floquet_observables
from chronolab import opalg
from chronolab import result_store
from chronolab import spin_models
from chronolab import time_lattice
from chronolab import two_mode_dtc

logger = logging.getLogger(__name__)

_NUMERICAL_ERRORS = (opalg.Error, spin_models.Error, floquet_observables.Error,
                     disorder_lab.Error, bosonic_ring.Error,
                     two_mode_dtc.Error, time_lattice.Error)


class Error(Exception):
    pass


class ExperimentError(Error):
    """Indicates a numerical or capacity failure inside an experiment."""


class _Writer(object):
    """Writes artifacts into one output directory and remembers them."""

    def __init__(self, out_dir, encoding):
        self._out_dir = out_dir
        self._encoding = encoding
        self._files = []

    @property
    def files(self):
        return list(self._files)

    def path(self, name):
        return os.path.join(self._out_dir, name)

    def add(self, path):
        self._files.append(path)
        return path

    def envelope(self, name, kind, payload):
        return self.add(
            result_store.write_envelope(self.path(name), kind, payload,
                                        self._encoding))

    def table(self, name, header, columns):
        return self.add(
            result_store.write_table(self.path(name), header, columns))

    def record(self, name, result):
        """Persists a RunRecord or PhaseDiagram without its wall time."""
        if isinstance(result, disorder_lab.RunRecord):
            result = result._replace(wall_clock_seconds=None)
        return self.add(
            disorder_lab.persist(result, self.path(name), self._encoding))


def _ensemble(config, model, pipeline=(disorder_lab.MAGNETIZATION,), **kwargs):
    params = config.params
    return disorder_lab.EnsembleSpec(model=model,
                                     n_realizations=params['realizations'],
                                     master_seed=config.seed,
                                     pipeline=pipeline,
                                     **kwargs)


def _aggregate(record, name):
    """Returns one aggregate of a record that had successful realizations."""
    if name not in record.aggregates:
        errors = [r.error for r in record.realizations if r.error]
        raise ExperimentError('No realization produced %s: %s' %
                              (name, errors[0] if errors else 'no output'))
    return record.aggregates[name]


def _write_magnetization(writer, record):
    mean, sem, _ = _aggregate(record, disorder_lab.MAGNETIZATION)
    writer.table('magnetization.csv', ['period_index', 'mean', 'sem'],
                 [np.arange(len(mean)), mean, sem])
    series = floquet_observables.TimeSeries(
        period=spin_models.period(record.spec.model), values=mean)
    dft = floquet_observables.dft_series(series)
    writer.table('dft.csv', ['freq_cycles_per_period', 'magnitude'],
                 [dft.freqs, dft.mags])


def _magnetization_run(config, runner, writer, model):
    record = runner.run(
        _ensemble(config, model, n_periods=config.params['periods']))
    writer.record('record.json', record)
    _write_magnetization(writer, record)
    logger.info('Subharmonic peak at %.4f cycles/period, locked=%s',
                record.subharmonic.peak_center, record.subharmonic.locked)


def _run_else_dtc(config, runner, writer):
    p = config.params
    _magnetization_run(
        config, runner, writer,
        spin_models.ElseSpec(L=p['L'],
                             epsilon=p['epsilon'],
                             J=p['J'],
                             hz=p['hz'],
                             h=p['h']))


def _run_ion_chain(config, runner, writer):
    p = config.params
    _magnetization_run(
        config, runner, writer,
        spin_models.IonSpec(L=p['L'],
                            epsilon=p['epsilon'],
                            J0=p['J0'],
                            alpha=p['alpha'],
                            W=p['W']))


def _run_nv_ensemble(config, runner, writer):
    p = config.params
    _magnetization_run(
        config, runner, writer,
        spin_models.NVSpec(L=p['L'],
                           tau1=p['tau1'],
                           tau2=p['tau2'],
                           omega_x=p['omega_x'],
                           omega_y=p['omega_y'],
                           J=p['J']))


def _run_khemani_sg(config, runner, writer):
    p = config.params
    model = spin_models.KhemaniSpec(L=p['L'], Jz=p['Jz'], t1=p['t1'],
                                    t2=p['t2'])
    record = runner.run(
        _ensemble(config,
                  model,
                  pipeline=(disorder_lab.SPECTRAL_FUNCTION,
                            disorder_lab.PI_PAIRING),
                  eta=p['eta'],
                  n_omega=p['n_omega']))
    writer.record('record.json', record)
    spectral = _aggregate(record, disorder_lab.SPECTRAL_FUNCTION)
    writer.table('spectral_function.csv', ['omega', 'mean', 'sem'],
                 [record.axes['omega'], spectral.mean, spectral.sem])


def _run_yao_phase_diagram(config, runner, writer):
    p = config.params
    template = _ensemble(config,
                         spin_models.YaoSpec(L=p['L'],
                                             epsilon=p['epsilon_min'],
                                             Jz=p['jz_min'],
                                             alpha=p['alpha'],
                                             range_hz=(0.0, p['hz_max'])),
                         n_periods=p['periods'])
    grid = disorder_lab.ScanGrid(
        jz_values=np.linspace(p['jz_min'], p['jz_max'],
                              p['jz_points']).tolist(),
        epsilon_values=np.linspace(p['epsilon_min'], p['epsilon_max'],
                                   p['epsilon_points']).tolist(),
        template=template)
    diagram = disorder_lab.scan_phase_diagram(grid, runner)
    jz, epsilon = [], []
    for i, row in enumerate(diagram.records):
        for j, record in enumerate(row):
            writer.record('cells/cell_%d_%d.json' % (i, j), record)
            _aggregate(record, disorder_lab.MAGNETIZATION)
            jz.append(grid.jz_values[i])
            epsilon.append(grid.epsilon_values[j])
    matrices = disorder_lab.report_matrix(diagram)
    writer.table('phase_diagram.csv', [
        'Jz', 'epsilon', 'peak_height', 'peak_center', 'peak_variance',
        'locked'
    ], [
        jz, epsilon, matrices['peak_height'].ravel(),
        matrices['peak_center'].ravel(), matrices['peak_variance'].ravel(),
        matrices['locked'].ravel().astype(int)
    ])


def _run_gpe_ring(config, runner, writer):
    p = config.params
    grid = bosonic_ring.RingGrid(p['points'])
    state = bosonic_ring.gpe_ground_state(
        bosonic_ring.GPEParams(gamma=p['gamma'],
                               flux=p['flux'],
                               tolerance=p['tolerance']), grid)
    writer.add(bosonic_ring.write_state(writer.path('state.csv'), state))
    summary = {
        'mu': state.mu,
        'residual': state.residual,
        'iterations': len(state.energies),
        'energy': state.energies[-1] if state.energies else None,
        'density_contrast': bosonic_ring.density_contrast(state),
        'symmetry_broken': bosonic_ring.is_symmetry_broken(state),
        'half_max_width': bosonic_ring.half_max_width(state),
        'current': bosonic_ring.probability_current(state, p['flux']),
    }
    if p['locate_threshold'] == 'yes':
        summary['threshold'] = bosonic_ring.find_threshold(grid)
    writer.envelope('summary.json', 'gpe_ring', summary)


def _run_two_mode_cat(config, runner, writer):
    p = config.params
    scaling = two_mode_dtc.gap_scaling(p['ratio'],
                                       range(p['n_min'], p['n_max'] + 1,
                                             p['n_step']),
                                       J=p['J'],
                                       U12=p['U12'],
                                       precise=p['precise'] == 'yes')
    writer.add(
        two_mode_dtc.write_gap_scaling(writer.path('gap_scaling.csv'),
                                       scaling))
    largest = two_mode_dtc.params_at_ratio(p['ratio'], scaling.particles[-1],
                                           J=p['J'], U12=p['U12'])
    ground = two_mode_dtc.classify_ground(largest)
    smallest = two_mode_dtc.params_at_ratio(p['ratio'], p['n_min'], J=p['J'],
                                            U12=p['U12'])
    times = np.linspace(0.0, 10.0, 21)
    collapse = two_mode_dtc.collapse_evolve(smallest,
                                            two_mode_dtc.ideal_cat(p['n_min']),
                                            0, times)
    writer.table('collapse.csv', ['time', 'branch_weight'],
                 [collapse.times, collapse.branch_trace])
    writer.envelope(
        'summary.json', 'two_mode_cat', {
            'slope': scaling.slope,
            'intercept': scaling.intercept,
            'r_squared': scaling.r_squared,
            'excluded': list(scaling.excluded),
            'phase': ground.phase,
            'variance': ground.variance,
            'marginal': ground.marginal,
            'outcome_probability': collapse.probability,
        })


def _run_lloyd_time(config, runner, writer):
    p = config.params
    rows = []
    profile = None
    for r in range(p['realizations']):
        seed = config.seed + r
        result = time_lattice.lloyd_localization(p['s'],
                                                 p['J'],
                                                 p['gamma'],
                                                 seed,
                                                 period=p['period'])
        rows.append((r, seed, result.fit_length, result.transfer_length,
                     result.time_length, len(result.window)))
        if profile is None:
            index = result.window[0] if result.window else 0
            profile = time_lattice.time_profile(result.ring,
                                                result.vectors[:, index])
    columns = [np.array(c) for c in zip(*rows)]
    writer.table('lloyd.csv', [
        'realization', 'seed', 'fit_length', 'transfer_length', 'time_length',
        'window_states'
    ], columns)
    writer.table('profile.csv', ['time', 'probability'],
                 [profile.times, profile.values])
    deviation = np.abs(columns[2] - columns[3]) / columns[3]
    deviation = deviation[np.isfinite(deviation)]
    exact = None
    if p['gamma'] > 0:
        exact = time_lattice.lloyd_exact_length(p['J'], p['gamma'], 0.0)
    writer.envelope(
        'summary.json', 'lloyd_time', {
            'median_deviation':
                np.median(deviation) if len(deviation) else None,
            'exact_length': exact,
            'recurrence': profile.recurrence,
        })


def _run_ring_anderson(config, runner, writer):
    p = config.params
    spec = time_lattice.DisorderedRingSpec(V0=p['V0'],
                                           k0=p['k0'],
                                           K=p['K'],
                                           omega=p['omega'],
                                           seed=config.seed)
    result = time_lattice.ring_anderson(spec, p['cutoff'])
    potential = result.potential
    writer.table('potential.csv', ['theta', 'U'],
                 [potential.theta, potential.values])
    writer.table('states.csv',
                 ['index', 'energy', 'length', 'r_squared', 'accepted'], [
                     np.arange(len(result.energies)), result.energies,
                     [f.length for f in result.fits],
                     [f.r_squared for f in result.fits],
                     [int(f.accepted) for f in result.fits]
                 ])
    density = time_lattice.state_density(result, 0)
    theta0 = 2.0 * np.pi * np.argmax(density) / len(density)
    profile = time_lattice.ring_time_profile(result, 0, theta0)
    writer.table('profile.csv', ['time', 'probability'],
                 [profile.times, profile.values])
    writer.envelope(
        'summary.json', 'ring_anderson', {
            'localized_fraction': time_lattice.localized_fraction(
                result, p['V0']),
            'localized_fraction_above': time_lattice.localized_fraction(
                result, 1.5 * p['V0']),
            'correlation_length': potential.correlation_length,
            'truncated': potential.truncated,
            'recurrence': profile.recurrence,
        })


def _run_secular_bands(config, runner, writer):
    p = config.params
    spec = time_lattice.PendulumSpec(mass=p['mass'],
                                     V0=p['V0'],
                                     s=p['s'],
                                     cutoff=p['cutoff'])
    bands = min(p['bands'], 2 * p['cutoff'] + 1)
    structure = time_lattice.secular_bands(
        spec, np.linspace(-0.5 * p['s'], 0.5 * p['s'], p['points']), bands)
    writer.table('bands.csv', ['q'] + ['band_%d' % b for b in range(bands)],
                 [structure.quasi_momenta] +
                 [structure.energies[:, b] for b in range(bands)])
    gaps = time_lattice.band_gaps(structure)
    writer.table('gaps.csv', ['band', 'gap'], [np.arange(len(gaps)), gaps])


def _run_phase_crystal(config, runner, writer):
    p = config.params
    spectrum = time_lattice.rwa_phase_crystal(
        time_lattice.PhaseCrystalSpec(s=p['s'],
                                      mu=p['mu'],
                                      lam=p['lam'],
                                      n_max=p['n_max']))
    bands = min([p['bands']] + [len(values) for values in spectrum.sectors])
    columns = [time_lattice.crystal_band(spectrum, b) for b in range(bands)]
    writer.table('crystal_bands.csv',
                 ['m'] + ['band_%d' % b for b in range(bands)],
                 [np.arange(p['s'])] + columns)
    summary = {
        'bandwidth': np.ptp(columns[0]),
        'flagged': int(sum(np.count_nonzero(f) for f in spectrum.flagged)),
    }
    if bands > 1:
        summary['gap'] = np.min(columns[1]) - np.max(columns[0])
    writer.envelope('summary.json', 'phase_crystal', summary)


def _run_bouncer(config, runner, writer):
    p = config.params
    result = time_lattice.bouncer_floquet(
        time_lattice.BouncerSpec(lam=p['lam'],
                                 omega=p['omega'],
                                 s=p['s'],
                                 steps_per_period=p['steps']))
    spectrum = result.spectrum
    weights = np.abs(spectrum.vectors)**2
    levels = np.arange(1, weights.shape[0] + 1).dot(weights)
    writer.table('quasi_energies.csv', ['index', 'quasi_energy', 'mean_level'],
                 [np.arange(len(spectrum.phases)), spectrum.phases, levels])
    writer.envelope(
        'floquet_pair.json', 'bouncer', {
            'resonant_level': result.basis.resonant_level + 1,
            'resonant_states': result.resonant_states,
            'quasi_energies': spectrum.phases[result.resonant_states],
            'splitting': result.splitting,
            'exchange_overlap': result.exchange_overlap,
        })


def _run_mott_time(config, runner, writer):
    p = config.params
    report = time_lattice.bose_hubbard_time(
        time_lattice.BoseHubbardTimeSpec(s=p['s'],
                                         J=p['J'],
                                         U=time_lattice.uniform_interactions(
                                             p['s'], p['U'], p['U_offsite']),
                                         N=p['N']))
    writer.envelope(
        'mott.json', 'mott_time', {
            'energies': report.energies,
            'gap': report.gap,
            'number_variance': report.number_variance,
            'coherence': report.coherence,
        })


_RUNNERS = {
    'else_dtc': _run_else_dtc,
    'khemani_sg': _run_khemani_sg,
    'yao_phase_diagram': _run_yao_phase_diagram,
    'ion_chain': _run_ion_chain,
    'nv_ensemble': _run_nv_ensemble,
    'gpe_ring': _run_gpe_ring,
    'two_mode_cat': _run_two_mode_cat,
    'lloyd_time': _run_lloyd_time,
    'ring_anderson': _run_ring_anderson,
    'secular_bands': _run_secular_bands,
    'phase_crystal': _run_phase_crystal,
    'bouncer': _run_bouncer,
    'mott_time': _run_mott_time,
}


def run_experiment(config, clock, workers=1,
                   pool_factory=multiprocessing.Pool):
    """Runs one experiment and writes its artifacts and manifest.

    Args:
        config: A validated ExperimentConfig.
        clock: Clock that times the run.
        workers: Worker processes for disorder ensembles.
        pool_factory: Pool factory handed to the EnsembleRunner.

    Returns:
        The RunManifest read back from the written manifest.

    Raises:
        ExperimentError when a computation fails.
        result_store.StoreIOError when a file cannot be written.
    """
    runner = disorder_lab.EnsembleRunner(clock, workers, pool_factory)
    started = clock.now()
    writer = _Writer(config.output, config.encoding)
    logger.info('Running experiment %s (seed %d) into %s', config.name,
                config.seed, config.output)
    try:
        _RUNNERS[config.name](config, runner, writer)
    except _NUMERICAL_ERRORS as ex:
        raise ExperimentError('Experiment %s failed: %s: %s' %
                              (config.name, type(ex).__name__, ex))
    path = result_store.write_manifest(
        config.output, experiment_config_parser.to_json(config),
        writer.files, clock.seconds_since(started), started, __version__)
    logger.info('Wrote %d artifacts and %s', len(writer.files), path)
    return result_store.read_manifest(path)
