"""Deterministic seed derivation and generator construction.

Sub-seeds are derived as hash(master seed, purpose tag, index...), so any
part of a computation can be re-run or parallelised without coordinating
on draw order.
"""

import hashlib

import numpy as np

# Normal sampling method used throughout; recorded in generation logs.
NORMAL_METHOD = "ziggurat(PCG64)"

_MASK64 = (1 << 64) - 1


def child_seed(master_seed, *tags):
    """Derive a 64-bit sub-seed from a master seed and purpose tags."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master_seed) & _MASK64).encode())
    for tag in tags:
        h.update(b"\x1f")
        h.update(str(tag).encode())
    return int.from_bytes(h.digest(), "little")


def generator(seed):
    """PCG64 generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))
