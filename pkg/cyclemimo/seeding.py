"""
Hierarchical random streams.

Every stream is `SeedSequence(master_seed, spawn_key=(ebn0_index, block_index, detector_slot, purpose))`
feeding a PCG64 generator. Streams that every detector must share (channel, bits, noise) use
detector slot 0; detector `i` in the configured list uses slot `i + 1`. A stream therefore depends
only on its coordinates, never on the order in which work items are scheduled.
"""

from enum import IntEnum

import numpy as np

SHARED_SLOT = 0


class Purpose(IntEnum):
    CHANNEL = 0
    BITS = 1
    NOISE = 2
    INIT = 3
    TRAIN = 4


def seed_sequence(
    master_seed: int,
    ebn0_index: int,
    block_index: int,
    detector_slot: int,
    purpose: Purpose,
) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(ebn0_index, block_index, detector_slot, int(purpose)))


def derive_rng(
    master_seed: int,
    ebn0_index: int,
    block_index: int,
    detector_slot: int,
    purpose: Purpose,
) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(seed_sequence(master_seed, ebn0_index, block_index, detector_slot, purpose))
    )


def derive_seed(master_seed: int, ebn0_index: int, purpose: Purpose) -> int:
    """Integer seed for generators that take one, such as the channel sequence of an Eb/N0 point."""
    state = seed_sequence(master_seed, ebn0_index, 0, SHARED_SLOT, purpose).generate_state(1, dtype=np.uint64)
    return int(state[0])


def detector_slot(position: int) -> int:
    return position + 1
