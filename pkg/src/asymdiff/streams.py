"""
Seeded random substreams.

Every random quantity in a run is drawn from a generator keyed by
``(master_seed, purpose, trial, node)``. Keys are hashed by
:class:`numpy.random.SeedSequence` into independent PCG64 states, so streams
for different trials, nodes or purposes never overlap. Within one
``(purpose, trial, node)`` stream, iteration ``i`` consumes the ``i``-th block
of draws, which keeps iterations disjoint as well.
"""
import enum

import numpy as np


class Purpose(enum.IntEnum):
    TOPOLOGY = 0
    SYSTEM = 1
    VARIANCES = 2
    REGRESSOR = 3
    NOISE = 4
    IMPULSE_GATE = 5


def substream(master_seed, purpose, trial=0, node=0):
    """Return the generator for one ``(purpose, trial, node)`` key."""
    if master_seed is None:
        raise ValueError("master_seed is required")
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(purpose), int(trial), int(node)))
    return np.random.Generator(np.random.PCG64(seq))


def as_generator(seed):
    """Accept an int seed or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
