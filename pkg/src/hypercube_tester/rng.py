"""Deterministic, splittable random streams.

Every stochastic component takes a numpy Generator. Streams are derived from a
master seed plus an integer path (e.g. (cell_index, trial_index)) through
SeedSequence spawn keys, backed by the counter-based Philox bit generator, so
any trial can be reproduced in isolation and results do not depend on
execution order.
"""

from __future__ import annotations

import numpy as np


def seed_sequence(master_seed: int, *path: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=tuple(int(p) for p in path)
    )


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Independent generator for (master_seed, *path); same inputs, same stream."""
    return np.random.Generator(np.random.Philox(seed_sequence(master_seed, *path)))
