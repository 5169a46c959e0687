"""Counter-based random streams.

Every stream is a Philox generator whose key is (seed, stream id) and whose
counter starts at ``index << 128``.  Point ``i`` of a run therefore sees the
same bits no matter which worker draws it or in what order.
"""
import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1
_INDEX_SHIFT = 128


def stream_id(name: str) -> int:
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def point_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    key = (int(seed) & _MASK64) | ((int(stream) & _MASK64) << 64)
    counter = int(index) << _INDEX_SHIFT
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def child_seed(rng: np.random.Generator) -> int:
    """Draw a 63-bit seed for a derived stream."""
    return int(rng.integers(0, 2**63 - 1))
