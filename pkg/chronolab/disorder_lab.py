"""Reproducible disorder ensembles and (Jz, epsilon) phase-diagram scans."""

import collections
import hashlib
import json
import logging
import multiprocessing

import numpy as np

from chronolab import floquet_observables
from chronolab import opalg
from chronolab import result_store
from chronolab import spin_models

logger = logging.getLogger(__name__)

MAGNETIZATION = 'magnetization'
R_STATISTIC = 'r_statistic'
SPECTRAL_FUNCTION = 'spectral_function'
PI_PAIRING = 'pi_pairing'
PIPELINE_STEPS = (MAGNETIZATION, R_STATISTIC, SPECTRAL_FUNCTION, PI_PAIRING)

_SPECTRAL_STEPS = (R_STATISTIC, SPECTRAL_FUNCTION, PI_PAIRING)

# Realization failures that are recorded instead of aborting the ensemble.
_REALIZATION_ERRORS = (spin_models.Error, opalg.Error,
                       floquet_observables.Error, np.linalg.LinAlgError)

sample_realization = spin_models.sample_realization


class Error(Exception):
    pass


class PipelineError(Error):
    """Indicates an ensemble spec whose pipeline cannot run on its model."""


class ScanGridError(Error):
    """Indicates an invalid phase-diagram grid."""


EnsembleSpec = collections.namedtuple(
    'EnsembleSpec', [
        'model', 'n_realizations', 'master_seed', 'pipeline', 'n_periods',
        'eta', 'n_omega', 'site', 'pairing_tol'
    ],
    defaults=((MAGNETIZATION,), 200, None, 512, 0, 1e-6))

# observables maps a pipeline step to a float or an array; error is None on
# success and a description of the failure otherwise.
RealizationResult = collections.namedtuple(
    'RealizationResult', ['index', 'seed', 'observables', 'error'])

Aggregate = collections.namedtuple('Aggregate', ['mean', 'sem', 'count'])

RunRecord = collections.namedtuple('RunRecord', [
    'spec', 'spec_hash', 'seeds', 'realizations', 'aggregates', 'axes',
    'subharmonic', 'wall_clock_seconds'
])

ScanGrid = collections.namedtuple('ScanGrid',
                                  ['jz_values', 'epsilon_values', 'template'])

# records[i][j] holds the run at jz_values[i], epsilon_values[j].
PhaseDiagram = collections.namedtuple('PhaseDiagram', ['grid', 'records'])


def realization_seed(spec, index):
    return spec.master_seed + index


def validate_ensemble(spec):
    """Checks an ensemble spec before any realization runs.

    Raises:
        PipelineError on an empty ensemble or an unknown pipeline step.
        opalg.CapacityError if the chain is too long for dense storage.
    """
    if spec.n_realizations < 1:
        raise PipelineError('Ensemble needs at least one realization: %d' %
                            spec.n_realizations)
    if spec.master_seed < 0:
        raise PipelineError('Master seed must be non-negative: %d' %
                            spec.master_seed)
    if not spec.pipeline:
        raise PipelineError('Pipeline is empty')
    for step in spec.pipeline:
        if step not in PIPELINE_STEPS:
            raise PipelineError('Unknown pipeline step: %s' % step)
    if MAGNETIZATION in spec.pipeline and spec.n_periods < 4:
        raise PipelineError('Magnetization traces need at least 4 periods: %d'
                            % spec.n_periods)
    if not 0 <= spec.site < spec.model.L:
        raise PipelineError('Site %d is outside a chain of %d spins' %
                            (spec.site, spec.model.L))
    opalg.check_dimension(2**spec.model.L)


def _observe(spec, realization):
    model = spec.model
    u = spin_models.build_floquet(model, realization)
    drive_period = spin_models.period(model)
    observables = {}
    if MAGNETIZATION in spec.pipeline:
        trace = floquet_observables.magnetization_trace(
            u, spin_models.initial_state(model),
            spin_models.observable(model), spec.n_periods, drive_period)
        observables[MAGNETIZATION] = trace.values
    if any(step in spec.pipeline for step in _SPECTRAL_STEPS):
        spectrum = floquet_observables.quasi_spectrum(u, drive_period)
        if R_STATISTIC in spec.pipeline:
            observables[R_STATISTIC] = floquet_observables.r_statistic(
                spectrum)
        if SPECTRAL_FUNCTION in spec.pipeline:
            _, density = floquet_observables.spectral_function(
                spectrum, spec.site, spec.eta, spec.n_omega)
            observables[SPECTRAL_FUNCTION] = density
        if PI_PAIRING in spec.pipeline:
            observables[PI_PAIRING] = floquet_observables.pi_pairing(
                spectrum, spec.pairing_tol)
    return observables


def _run_realization(task):
    """Runs one realization; module level so worker processes can pickle it.

    Args:
        task: (EnsembleSpec, realization index).
    """
    spec, index = task
    seed = realization_seed(spec, index)
    try:
        realization = spin_models.sample_realization(spec.model, seed)
        observables = _observe(spec, realization)
    except _REALIZATION_ERRORS as ex:
        logger.warning('Realization %d (seed %d) failed: %s', index, seed, ex)
        return RealizationResult(index=index,
                                 seed=seed,
                                 observables={},
                                 error='%s: %s' % (type(ex).__name__, ex))
    return RealizationResult(index=index,
                             seed=seed,
                             observables=observables,
                             error=None)


def aggregate(results):
    """Mean and standard error of every observable over successful results.

    Results are reduced in index order, so the floating-point sums do not
    depend on the order in which realizations finished.

    Returns:
        A dict mapping observable name to Aggregate.
    """
    ordered = sorted((r for r in results if r.error is None),
                     key=lambda r: r.index)
    names = sorted(set(name for r in ordered for name in r.observables))
    aggregates = {}
    for name in names:
        samples = np.array([r.observables[name] for r in ordered])
        count = len(samples)
        mean = np.mean(samples, axis=0)
        if count > 1:
            sem = np.std(samples, axis=0, ddof=1) / np.sqrt(count)
        else:
            sem = np.zeros_like(mean)
        aggregates[name] = Aggregate(mean=mean, sem=sem, count=count)
    return aggregates


def _axes(spec):
    axes = {}
    if SPECTRAL_FUNCTION in spec.pipeline:
        axes['omega'] = floquet_observables.omega_grid(
            spin_models.period(spec.model), spec.n_omega)
    return axes


def _subharmonic(spec, aggregates):
    if MAGNETIZATION not in aggregates:
        return None
    series = floquet_observables.TimeSeries(
        period=spin_models.period(spec.model),
        values=aggregates[MAGNETIZATION].mean)
    return floquet_observables.subharmonic_peak(
        floquet_observables.dft_series(series))


class EnsembleRunner(object):
    """Runs every realization of an ensemble over a pool of workers."""

    def __init__(self, clock, workers=1, pool_factory=multiprocessing.Pool):
        """Creates a new EnsembleRunner.

        Args:
            clock: Clock used to time each ensemble.
            workers: Number of worker processes; 1 runs in-process.
            pool_factory: Callable returning a context-managed pool with a
                map method, given the worker count.
        """
        if workers < 1:
            raise ValueError('Worker count must be positive: %d' % workers)
        self._clock = clock
        self._workers = workers
        self._pool_factory = pool_factory

    def _map(self, tasks):
        if self._workers == 1 or len(tasks) == 1:
            return [_run_realization(task) for task in tasks]
        with self._pool_factory(min(self._workers, len(tasks))) as pool:
            return pool.map(_run_realization, tasks)

    def run(self, spec, order=None):
        """Runs an ensemble and aggregates its observables.

        Args:
            spec: EnsembleSpec to run.
            order: Optional permutation of realization indices giving the
                execution order. The record does not depend on it.

        Returns:
            A RunRecord.
        """
        validate_ensemble(spec)
        indices = list(range(spec.n_realizations))
        if order is not None:
            if sorted(order) != indices:
                raise PipelineError('Execution order is not a permutation')
            indices = list(order)
        started = self._clock.now()
        logger.info('Running %d %s realizations from seed %d',
                    spec.n_realizations, spin_models.model_tag(spec.model),
                    spec.master_seed)
        results = sorted(self._map([(spec, i) for i in indices]),
                         key=lambda r: r.index)
        aggregates = aggregate(results)
        failures = sum(1 for r in results if r.error is not None)
        if failures:
            logger.warning('%d of %d realizations failed', failures,
                           len(results))
        record = RunRecord(spec=spec,
                           spec_hash=spec_hash(spec),
                           seeds=[r.seed for r in results],
                           realizations=results,
                           aggregates=aggregates,
                           axes=_axes(spec),
                           subharmonic=_subharmonic(spec, aggregates),
                           wall_clock_seconds=self._clock.seconds_since(
                               started))
        logger.info('Finished ensemble in %.1f s', record.wall_clock_seconds)
        return record


def _validate_grid(grid):
    for name in ('jz_values', 'epsilon_values'):
        values = list(getattr(grid, name))
        if not values:
            raise ScanGridError('Scan axis %s is empty' % name)
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ScanGridError('Scan axis %s is not ascending: %s' %
                                (name, values))
    model_fields = type(grid.template.model)._fields
    if 'Jz' not in model_fields or 'epsilon' not in model_fields:
        raise ScanGridError('Model %s has no Jz and epsilon parameters' %
                            type(grid.template.model).__name__)


def cell_spec(grid, i, j):
    """Ensemble spec of scan cell (jz_values[i], epsilon_values[j])."""
    model = grid.template.model._replace(Jz=grid.jz_values[i],
                                         epsilon=grid.epsilon_values[j])
    return grid.template._replace(model=model)


def scan_phase_diagram(grid, runner):
    """Runs one ensemble per (Jz, epsilon) cell of a grid."""
    _validate_grid(grid)
    records = []
    for i, jz in enumerate(grid.jz_values):
        row = []
        for j, epsilon in enumerate(grid.epsilon_values):
            logger.info('Scanning cell Jz=%g epsilon=%g', jz, epsilon)
            row.append(runner.run(cell_spec(grid, i, j)))
        records.append(row)
    return PhaseDiagram(grid=grid, records=records)


def report_matrix(diagram):
    """Subharmonic descriptors of every cell as (len(Jz), len(eps)) arrays."""
    fields = floquet_observables.SubharmonicReport._fields
    matrices = {}
    for field in fields:
        matrices[field] = np.array(
            [[getattr(record.subharmonic, field) for record in row]
             for row in diagram.records],
            dtype=bool if field == 'locked' else float)
    return matrices


# Serialization.


def spec_to_json(spec):
    return {
        'model': {
            'tag': spin_models.model_tag(spec.model),
            'params': dict(spec.model._asdict())
        },
        'n_realizations': spec.n_realizations,
        'master_seed': spec.master_seed,
        'pipeline': list(spec.pipeline),
        'n_periods': spec.n_periods,
        'eta': spec.eta,
        'n_omega': spec.n_omega,
        'site': spec.site,
        'pairing_tol': spec.pairing_tol,
    }


def _tuples(value):
    if isinstance(value, list):
        return tuple(value)
    return value


def spec_from_json(document):
    model_class = spin_models.spec_class(document['model']['tag'])
    params = {k: _tuples(v) for k, v in document['model']['params'].items()}
    return EnsembleSpec(model=model_class(**params),
                        n_realizations=document['n_realizations'],
                        master_seed=document['master_seed'],
                        pipeline=tuple(document['pipeline']),
                        n_periods=document['n_periods'],
                        eta=document['eta'],
                        n_omega=document['n_omega'],
                        site=document['site'],
                        pairing_tol=document['pairing_tol'])


def spec_hash(spec):
    """sha256 of the canonical JSON form of an ensemble spec."""
    canonical = json.dumps(result_store.to_json(spec_to_json(spec)),
                           sort_keys=True,
                           separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def _record_to_json(record):
    return {
        'spec': spec_to_json(record.spec),
        'spec_hash': record.spec_hash,
        'seeds': list(record.seeds),
        'realizations': [dict(r._asdict()) for r in record.realizations],
        'aggregates': {
            name: dict(a._asdict()) for name, a in record.aggregates.items()
        },
        'axes': record.axes,
        'subharmonic': (None if record.subharmonic is None else dict(
            record.subharmonic._asdict())),
        'wall_clock_seconds': record.wall_clock_seconds,
    }


def _record_from_json(document):
    subharmonic = document['subharmonic']
    if subharmonic is not None:
        subharmonic = floquet_observables.SubharmonicReport(**subharmonic)
    return RunRecord(
        spec=spec_from_json(document['spec']),
        spec_hash=document['spec_hash'],
        seeds=document['seeds'],
        realizations=[
            RealizationResult(**r) for r in document['realizations']
        ],
        aggregates={
            name: Aggregate(**a)
            for name, a in document['aggregates'].items()
        },
        axes=document['axes'],
        subharmonic=subharmonic,
        wall_clock_seconds=document['wall_clock_seconds'])


def _diagram_to_json(diagram):
    grid = diagram.grid
    return {
        'grid': {
            'jz_values': list(grid.jz_values),
            'epsilon_values': list(grid.epsilon_values),
            'template': spec_to_json(grid.template)
        },
        'cells': [[_record_to_json(r) for r in row]
                  for row in diagram.records],
    }


def _diagram_from_json(document):
    grid = ScanGrid(jz_values=document['grid']['jz_values'],
                    epsilon_values=document['grid']['epsilon_values'],
                    template=spec_from_json(document['grid']['template']))
    return PhaseDiagram(grid=grid,
                        records=[[_record_from_json(c) for c in row]
                                 for row in document['cells']])


def persist(result, path, encoding=result_store.HEX):
    """Writes a RunRecord or PhaseDiagram to a versioned JSON envelope."""
    if isinstance(result, PhaseDiagram):
        return result_store.write_envelope(path, 'phase_diagram',
                                           _diagram_to_json(result), encoding)
    return result_store.write_envelope(path, 'run_record',
                                       _record_to_json(result), encoding)


def load(path):
    """Reads back a RunRecord or PhaseDiagram written by persist()."""
    kind, payload = result_store.read_envelope(path)
    if kind == 'phase_diagram':
        return _diagram_from_json(payload)
    if kind == 'run_record':
        return _record_from_json(payload)
    raise result_store.SchemaVersionError('%s holds unknown result kind %s' %
                                          (path, kind))
