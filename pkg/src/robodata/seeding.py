"""Deterministic per-record random streams.

Pipeline stages that randomize per record (template choice, RANSAC
sampling) derive their generator from a corpus-level seed XORed with a
stable 64-bit hash of the record key.  This keeps every record's
stream independent of batch composition and worker scheduling.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def stable_hash64(key: str) -> int:
    """64-bit hash of a string key, stable across processes and platforms."""
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def check_seed(seed: int) -> int:
    if type(seed) is not int or not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return seed


def derive_rng(seed: int, key: str) -> np.random.Generator:
    """Generator for one record: corpus seed XOR the key's stable hash."""
    check_seed(seed)
    return np.random.default_rng(seed ^ stable_hash64(key))
