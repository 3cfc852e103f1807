"""Counter-derived random streams.

Every trial owns a family of independent Philox streams keyed by
``(master_seed, trial_index, stream_kind)``; nothing depends on the order in
which trials are executed.
"""
from __future__ import annotations

import numpy as np

CHIPS = 0
MESSAGES = 1
BOB_NOISE = 2
WILLIE_NOISE = 3
WILLIE_SILENT = 4


def stream(master_seed: int, trial: int, kind: int) -> np.random.Philox:
    return np.random.Philox(np.random.SeedSequence(master_seed, spawn_key=(trial, kind)))


def as_bitgen(seed) -> np.random.BitGenerator:
    if isinstance(seed, np.random.BitGenerator):
        return seed
    if isinstance(seed, np.random.Generator):
        return seed.bit_generator
    return np.random.Philox(np.random.SeedSequence(seed))


def unpack_bits(words: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Row-major bit unpacking: bit ``j`` of row ``i`` is bit ``j % 64`` of word ``j // 64``."""
    per_row = -(-cols // 64)
    words = np.ascontiguousarray(words, dtype="<u8").reshape(rows, per_row)
    bits = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :cols]
