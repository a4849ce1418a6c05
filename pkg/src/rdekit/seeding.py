"""Named random sub-streams derived from one run seed."""
from __future__ import annotations

import zlib

import numpy as np

DEFAULT_SEED = 20121108


def substream(seed: int, *names: str) -> np.random.SeedSequence:
    key = tuple(zlib.crc32(n.encode()) for n in names)
    return np.random.SeedSequence(int(seed), spawn_key=key)


def substream_seed(seed: int, *names: str) -> int:
    return int(substream(seed, *names).generate_state(1, dtype=np.uint64)[0])


def substream_rng(seed: int, *names: str) -> np.random.Generator:
    return np.random.default_rng(substream(seed, *names))
