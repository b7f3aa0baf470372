"""Seed plumbing: every random stream is a pure function of (seed, keys)."""

from __future__ import annotations

import struct
import zlib

import numpy as np


def _key_to_int(key) -> int:
    if isinstance(key, (bool, np.bool_)):
        return int(key)
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError(f"negative stream key {key}")
        return int(key)
    if isinstance(key, (float, np.floating)):
        # bit pattern, so 0.5 and 0.50000001 get different streams
        return struct.unpack("<Q", struct.pack("<d", float(key)))[0]
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    raise TypeError(f"unsupported stream key {key!r}")


def make_rng(seed, *keys) -> np.random.Generator:
    """Independent generator for the stream identified by ``(seed, *keys)``.

    A ready Generator is passed through untouched when no keys are given.
    """
    if isinstance(seed, np.random.Generator):
        if keys:
            raise TypeError("cannot derive keyed streams from a Generator; pass an integer seed")
        return seed
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy
        base = [entropy] if isinstance(entropy, int) else list(entropy)
        base += list(seed.spawn_key)
    else:
        base = [_key_to_int(seed)]
    return np.random.default_rng(np.random.SeedSequence(base + [_key_to_int(k) for k in keys]))
