"""Counter-based random draws keyed by seed, stream name and site."""

import zlib

import numpy as np


def _stream_key(stream):
    return zlib.crc32(stream.encode('utf-8')) & 0xffffffff


def generator(seed, stream, *keys):
    """Returns an independent generator for (seed, stream, keys).

    The same arguments always produce the same generator state, regardless
    of which other keys were drawn before.

    Args:
        seed: Non-negative integer master seed.
        stream: Name of the quantity being drawn, e.g. 'else.hz'.
        *keys: Non-negative integers locating the draw (site, pair, ...).

    Raises:
        ValueError if the seed or a key is negative.
    """
    entropy = [int(seed), _stream_key(stream)] + [int(k) for k in keys]
    if any(value < 0 for value in entropy):
        raise ValueError('Seeds and keys must be non-negative: %s' %
                         (entropy,))
    return np.random.default_rng(entropy)


def uniform(seed, stream, keys, interval):
    """Draws one uniform value per key from the half-open interval.

    Args:
        seed: Master seed.
        stream: Stream name.
        keys: Sequence of keys; each key is an int or a tuple of ints.
        interval: (low, high) with low <= high.

    Returns:
        A float array with one entry per key.
    """
    low, high = interval
    if low > high:
        raise ValueError('Interval is empty: [%g, %g]' % (low, high))
    values = []
    for key in keys:
        key = key if isinstance(key, tuple) else (key,)
        values.append(generator(seed, stream, *key).uniform(low, high))
    return np.array(values, dtype=float)
