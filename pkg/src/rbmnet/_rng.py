"""Counter-based RNG substreams.

Every random routine in the package draws from a Philox generator keyed by
``(seed, stream id)``.  Philox is counter-based, so substreams derived from
the same seed are independent and reproducible regardless of execution
order, which is what makes parallel chains / trials deterministic.
"""

import numpy as np

# stream tags; keep values stable, they are part of the reproducibility story
GIBBS = 1
TRIAL = 2
SPLIT = 3
BINARIZE = 4
GENERATE = 5
FIT = 6
GLAUBER = 7


def substream(seed, tag, index=0):
    """Generator for substream ``index`` of stream ``tag`` under ``seed``."""
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    sid = (np.uint64(tag) << np.uint64(32)) + np.uint64(index)
    key = np.array([np.uint64(seed), sid], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed, tag, index):
    """Child seed for nested components (e.g. one experiment trial)."""
    return int(substream(seed, tag, index).integers(0, 2 ** 62))
