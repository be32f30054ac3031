"""Counter-based splittable random streams.

Every stochastic routine takes an explicit numpy Generator.  Parallel work
units (MCMC chains, SDE trajectories, scan shards) get independent streams
keyed by (seed, stream id) through Philox, so results are bitwise
reproducible regardless of scheduling or thread count.
"""

import numpy as np

__all__ = ["stream", "spawn_streams"]


def stream(seed, stream_id=0):
    """Philox generator keyed by (seed, stream_id)."""
    return np.random.Generator(np.random.Philox(key=(int(seed) << 32) + int(stream_id)))


def spawn_streams(seed, count, base=0):
    """Independent generators for `count` logical work units."""
    return [stream(seed, base + i) for i in range(count)]
