"""Deterministic random-stream splitting.

All stochastic state in the simulator is drawn from Philox counter-based
generators keyed by a (master_seed, *path) tuple through numpy's
SeedSequence. The path encodes the position in the experiment tree
(master -> grid point -> scheme -> trial -> column), so serial and
parallel execution of the same spec consume identical streams.
"""

from __future__ import annotations

import numpy as np


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Return the generator for node ``path`` under ``master_seed``."""
    if master_seed < 0:
        raise ValueError("master seed must be non-negative")
    key = tuple(int(p) for p in path)
    if any(p < 0 for p in key):
        raise ValueError("stream path entries must be non-negative")
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(seq))
