"""Deterministic random streams.

Every stochastic operation in the library draws from a Philox counter-based
generator keyed by an explicit 64-bit seed plus a stream tag.  Philox output
is a pure function of (key, counter), so runs reproduce bit-identically
across platforms and across worker counts: stream tags, not draw order,
decide what each consumer sees.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _fold_key(seed: int, stream: tuple) -> np.ndarray:
    h = hashlib.sha256()
    h.update(int(seed & _MASK64).to_bytes(8, "little"))
    for part in stream:
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x1f")
    digest = h.digest()
    lo = int.from_bytes(digest[:8], "little")
    hi = int.from_bytes(digest[8:16], "little")
    return np.array([lo, hi], dtype=np.uint64)


def make_generator(seed: int, *stream) -> np.random.Generator:
    """Generator for (seed, *stream); identical arguments give identical draws."""
    return np.random.Generator(np.random.Philox(key=_fold_key(seed, stream)))


def derive_seed(seed: int, *stream) -> int:
    """Fold (seed, *stream) into a fresh 64-bit seed for a child component."""
    return int(_fold_key(seed, stream)[0])
