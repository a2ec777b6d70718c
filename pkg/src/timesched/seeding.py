"""Seed splitting shared by every randomized routine.

``derive_seed(master, a, b, ...)`` hashes the decimal forms of its arguments,
joined by ``"/"``, with BLAKE2b (8-byte digest) and reads the digest as an
unsigned big-endian integer. Per-instance seeds are
``derive_seed(master, instance_index)`` and per-trial seeds
``derive_seed(instance_seed, trial_index)``.
"""
from hashlib import blake2b

import numpy as np


def derive_seed(*parts) -> int:
    key = "/".join(str(int(p)) for p in parts).encode()
    return int.from_bytes(blake2b(key, digest_size=8).digest(), "big")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, trial))
