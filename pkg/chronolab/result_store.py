"""Versioned JSON envelopes, CSV tables and run manifests on disk."""

import collections
import csv
import hashlib
import io
import json
import logging
import os

import numpy as np
from dateutil import parser

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MANIFEST_NAME = 'manifest.json'

HEX = 'hex'
DECIMAL = 'decimal'
ENCODINGS = (HEX, DECIMAL)

_ARRAY_TAG = '__array__'


class Error(Exception):
    pass


class SchemaVersionError(Error):
    """Indicates a result file written with an unsupported schema version."""


class StoreIOError(Error):
    """Indicates a failure to read or write a result file."""

    def __init__(self, message, path):
        super(StoreIOError, self).__init__(message)
        self.path = path


class ManifestMismatchError(Error):
    """Indicates that files on disk differ from a run manifest."""


RunManifest = collections.namedtuple('RunManifest', [
    'config', 'files', 'schema_versions', 'wall_clock_seconds',
    'tool_version', 'created'
])


def serialize_timestamp(timestamp):
    """Converts a timestamp to a string in ISO 8601 format."""
    return timestamp.isoformat('T')


def _encode_floats(values, encoding):
    if encoding == HEX:
        return [float(v).hex() for v in values]
    return [float(v) for v in values]


def _decode_floats(values, encoding):
    if encoding == HEX:
        return [float.fromhex(v) for v in values]
    return [float(v) for v in values]


def encode_array(values, encoding=HEX):
    """Encodes a real or complex array losslessly as a JSON-ready dict.

    Hex encoding stores every double as float.hex(); decimal encoding
    relies on the shortest round-trip repr of each double.
    """
    if encoding not in ENCODINGS:
        raise ValueError('Unknown array encoding: %s' % encoding)
    array = np.asarray(values)
    flat = array.ravel()
    encoded = {_ARRAY_TAG: encoding, 'shape': list(array.shape)}
    if np.iscomplexobj(array):
        encoded['real'] = _encode_floats(flat.real, encoding)
        encoded['imag'] = _encode_floats(flat.imag, encoding)
    else:
        encoded['data'] = _encode_floats(flat, encoding)
    return encoded


def decode_array(encoded):
    encoding = encoded[_ARRAY_TAG]
    shape = tuple(encoded['shape'])
    if 'data' in encoded:
        flat = np.array(_decode_floats(encoded['data'], encoding),
                        dtype=float)
    else:
        flat = (np.array(_decode_floats(encoded['real'], encoding)) +
                1j * np.array(_decode_floats(encoded['imag'], encoding)))
    return flat.reshape(shape)


def to_json(value, encoding=HEX):
    """Converts nested results into JSON-ready values.

    Arrays become tagged dicts, numpy scalars become Python numbers and
    tuples become lists.
    """
    if isinstance(value, np.ndarray):
        return encode_array(value, encoding)
    if isinstance(value, dict):
        return {str(k): to_json(v, encoding) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_json(v, encoding) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def from_json(value):
    if isinstance(value, dict):
        if _ARRAY_TAG in value:
            return decode_array(value)
        return {k: from_json(v) for k, v in value.items()}
    if isinstance(value, list):
        return [from_json(v) for v in value]
    return value


def _ensure_parent(path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def _write_text(path, text):
    try:
        _ensure_parent(path)
        with io.open(path, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(text)
    except OSError as ex:
        raise StoreIOError('Failed to write %s: %s' % (path, ex), path)
    logger.debug('Wrote %s', path)
    return path


def dumps(document):
    return json.dumps(document, sort_keys=True, indent=2) + '\n'


def write_envelope(path, kind, payload, encoding=HEX):
    """Writes {schema_version, kind, **payload} as sorted, indented JSON."""
    document = to_json(payload, encoding)
    document['schema_version'] = SCHEMA_VERSION
    document['kind'] = kind
    return _write_text(path, dumps(document))


def read_envelope(path):
    """Reads an envelope written by write_envelope.

    Returns:
        (kind, payload) with arrays decoded.

    Raises:
        StoreIOError if the file cannot be read or parsed.
        SchemaVersionError if the schema version is not supported.
    """
    try:
        with io.open(path, encoding='utf-8') as handle:
            document = json.load(handle)
    except (OSError, ValueError) as ex:
        raise StoreIOError('Failed to read %s: %s' % (path, ex), path)
    version = document.pop('schema_version', None)
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            'Unsupported schema version in %s: %s (expected %d)' %
            (path, version, SCHEMA_VERSION))
    kind = document.pop('kind', None)
    return kind, from_json(document)


def _format_cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_table(path, header, columns):
    """Writes equally long columns to a CSV file with a header row."""
    lengths = set(len(column) for column in columns)
    if len(header) != len(columns) or len(lengths) > 1:
        raise ValueError('Header and columns do not line up: %s' %
                         (header,))
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in zip(*columns):
        writer.writerow([_format_cell(v) for v in row])
    return _write_text(path, buffer.getvalue())


def read_table(path):
    """Reads a CSV table back as (header, float columns)."""
    try:
        with io.open(path, encoding='utf-8', newline='') as handle:
            rows = list(csv.reader(handle))
    except OSError as ex:
        raise StoreIOError('Failed to read %s: %s' % (path, ex), path)
    header = rows[0]
    columns = [np.array([float(row[i]) for row in rows[1:]])
               for i in range(len(header))]
    return header, columns


def write_time_series(path, series):
    values = np.asarray(series.values)
    return write_table(path, ['period_index', 'value'],
                       [np.arange(len(values)), values])


def write_dft(path, dft):
    return write_table(path, ['freq_cycles_per_period', 'magnitude'],
                       [dft.freqs, dft.mags])


def file_digest(path):
    digest = hashlib.sha256()
    try:
        with open(path, 'rb') as handle:
            for chunk in iter(lambda: handle.read(65536), b''):
                digest.update(chunk)
    except OSError as ex:
        raise StoreIOError('Failed to hash %s: %s' % (path, ex), path)
    return digest.hexdigest()


def write_manifest(out_dir, config, files, wall_clock_seconds, created,
                   tool_version):
    """Writes manifest.json listing every artifact with its sha256 hash.

    Args:
        out_dir: Directory that holds the artifacts and the manifest.
        config: JSON-ready echo of the experiment config.
        files: Artifact paths, absolute or relative to out_dir.
        wall_clock_seconds: Run duration.
        created: tz-aware datetime of the run.
        tool_version: Package version string.

    Returns:
        The path of the manifest.
    """
    entries = []
    for path in files:
        relative = os.path.relpath(path, out_dir)
        entries.append({
            'path': relative.replace(os.sep, '/'),
            'sha256': file_digest(os.path.join(out_dir, relative))
        })
    document = {
        'schema_version': SCHEMA_VERSION,
        'kind': 'manifest',
        'config': config,
        'files': sorted(entries, key=lambda entry: entry['path']),
        'schema_versions': {
            'result': SCHEMA_VERSION
        },
        'wall_clock_seconds': wall_clock_seconds,
        'tool_version': tool_version,
        'created': serialize_timestamp(created),
    }
    return _write_text(os.path.join(out_dir, MANIFEST_NAME), dumps(document))


def read_manifest(path):
    kind, payload = read_envelope(path)
    if kind != 'manifest':
        raise SchemaVersionError('%s is not a run manifest: %s' % (path, kind))
    return RunManifest(config=payload['config'],
                       files=[(entry['path'], entry['sha256'])
                              for entry in payload['files']],
                       schema_versions=payload['schema_versions'],
                       wall_clock_seconds=payload['wall_clock_seconds'],
                       tool_version=payload['tool_version'],
                       created=parser.parse(payload['created']))


def verify_manifest(path):
    """Recomputes the hash of every file listed in a manifest.

    Returns:
        The parsed RunManifest when every file matches.

    Raises:
        ManifestMismatchError listing missing or modified files.
    """
    manifest = read_manifest(path)
    out_dir = os.path.dirname(path)
    problems = []
    for relative, expected in manifest.files:
        full_path = os.path.join(out_dir, relative)
        if not os.path.exists(full_path):
            problems.append('missing %s' % relative)
        elif file_digest(full_path) != expected:
            problems.append('modified %s' % relative)
    if problems:
        raise ManifestMismatchError('Manifest check failed: %s' %
                                    ', '.join(problems))
    return manifest
