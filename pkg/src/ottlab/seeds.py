"""Deterministic derivation of independent RNG streams from one master seed.

The split rule: a stream is addressed by the master seed plus a path of
labels (strings hashed to 64-bit ints via SHA-256, ints used as-is).  The
tuple feeds ``numpy.random.SeedSequence``, whose mixing guarantees
independent, reproducible streams.  Parallel consumers derive their own
streams by index instead of sharing one generator, so results never depend
on scheduling.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_to_int(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label)
    digest = hashlib.sha256(str(label).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def substream(master_seed: int, *path) -> np.random.Generator:
    """Generator for the stream addressed by (master_seed, *path)."""
    entropy = (int(master_seed),) + tuple(_label_to_int(p) for p in path)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
