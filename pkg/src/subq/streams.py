"""Counter-based RNG streams indexed by (master seed, trajectory index).

Philox is counter based, so keying each stream with the pair
(master_seed, index) gives statistically independent streams whose draws
do not depend on scheduling or worker count.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream"]


def stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for trajectory `index` under `master_seed`."""
    return np.random.Generator(np.random.Philox(key=[master_seed, index]))
