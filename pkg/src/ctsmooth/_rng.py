"""Keyed random substreams.

Each unit of simulated work (a replication, a posterior draw) gets its own
generator derived from the user seed and an integer key, so results never
depend on how the work is split over threads.
"""

import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
