"""Counter-based random streams.

Every replicate, draw or path block gets its own Philox stream whose 128-bit
key is ``(index << 64) | seed``. Results therefore do not depend on the order
in which replicates are evaluated or on how many workers evaluate them.
"""
from concurrent.futures import ThreadPoolExecutor

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed, index=0, sub=0):
    """Generator keyed by ``(seed, index)``; ``sub`` selects a disjoint counter block."""
    key = ((int(index) & _MASK64) << 64) | (int(seed) & _MASK64)
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, int(sub)]))


def indexed_map(func, n, workers=1):
    """Evaluate ``func(i)`` for ``i in range(n)`` and return results in index order."""
    if workers is None or workers <= 1 or n <= 1:
        return [func(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, range(n)))
