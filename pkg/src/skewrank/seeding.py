"""Deterministic seed derivation.

Every randomized operation in the package takes an explicit seed and derives
per-trial seeds from it by hashing, so results are reproducible across runs,
platforms and backends, and independent trials can run in any order.
"""

import hashlib
import random


def derive_seed(master: int, *parts) -> int:
    """Derive a child seed from a master seed and a label path."""
    h = hashlib.blake2b(repr((int(master),) + parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big")


def rng_from(master: int, *parts) -> random.Random:
    return random.Random(derive_seed(master, *parts))
