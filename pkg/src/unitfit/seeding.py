"""Deterministic seed substreams and the worker-count knob."""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "UNITFIT_THREADS"
_MASK64 = (1 << 64) - 1


def derive_substream_seed(master: int, *labels) -> int:
    """Mix a 64-bit master seed with an ordered tuple of labels.

    The mixing function is BLAKE2b with an 8-byte digest over the
    little-endian master seed followed by the labels' ``str`` forms joined by
    the unit separator ``\\x1f``. The output is a 64-bit unsigned integer.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update((int(master) & _MASK64).to_bytes(8, "little"))
    h.update("\x1f".join(str(x) for x in labels).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def substream_rng(master: int, *labels) -> np.random.Generator:
    return np.random.default_rng(derive_substream_seed(master, *labels))


def worker_count(default: int | None = None) -> int:
    """Worker cap from ``UNITFIT_THREADS``; falls back to the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw is not None and raw.strip():
        try:
            k = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
        if k < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return k
    return default or min(8, os.cpu_count() or 1)


def map_ordered(func, items, workers: int | None = None) -> list:
    """``[func(x) for x in items]`` run on a thread pool; order is preserved."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))
