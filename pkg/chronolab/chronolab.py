import argparse
import io
import logging
import os
import sys

from chronolab import clock
from chronolab import experiment_config_parser
from chronolab import experiments
from chronolab import result_store

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2
EXIT_IO_ERROR = 3


def read_experiment_config(config_filename, seed=None, output=None):
    """Reads an experiment config and applies command-line overrides."""
    with io.open(config_filename, encoding='utf-8') as config_file:
        config = experiment_config_parser.parse(config_file.read())
    if seed is not None:
        if seed < 0:
            raise experiment_config_parser.InvalidConfigError(
                'Invalid seed override: %d' % seed,
                ['experiment.seed: must be >= 0 (got %d)' % seed])
        config = config._replace(seed=seed)
    if output is not None:
        config = config._replace(output=output)
    return config


def _check(config):
    manifest = result_store.verify_manifest(
        os.path.join(config.output, result_store.MANIFEST_NAME))
    logger.info('All %d files listed in the manifest match',
                len(manifest.files))


def main(args):
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s %(name)-30s %(levelname)-8s %(message)s')
    if args.workers < 1:
        logger.error('Worker count must be positive: %d', args.workers)
        return EXIT_CONFIG_ERROR
    try:
        config = read_experiment_config(args.config, args.seed, args.out)
        if args.check:
            _check(config)
        else:
            experiments.run_experiment(config, clock.LocalClock(),
                                       args.workers)
    except experiment_config_parser.InvalidConfigError as ex:
        logger.error('%s', ex)
        return EXIT_CONFIG_ERROR
    except (experiments.ExperimentError, result_store.ManifestMismatchError,
            result_store.SchemaVersionError) as ex:
        logger.error('%s', ex)
        return EXIT_RUNTIME_ERROR
    except (result_store.StoreIOError, OSError) as ex:
        logger.error('%s', ex)
        return EXIT_IO_ERROR
    return EXIT_SUCCESS


def parse_args(argv=None):
    parser = argparse.ArgumentParser(
        prog='chronolab',
        description='Runs a time-crystal experiment from a config file',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('-c',
                        '--config',
                        required=True,
                        help='Experiment config file')
    parser.add_argument('--seed',
                        type=int,
                        help='Override the master seed of the config')
    parser.add_argument('--out',
                        help='Override the output directory of the config')
    parser.add_argument('--workers',
                        type=int,
                        default=os.cpu_count() or 1,
                        help='Worker processes for disorder ensembles')
    parser.add_argument(
        '--check',
        action='store_true',
        help='Verify the hashes in an existing manifest instead of running')
    return parser.parse_args(argv)


if __name__ == '__main__':
    sys.exit(main(parse_args()))
