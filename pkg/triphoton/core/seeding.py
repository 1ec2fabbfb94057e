"""
Seeded random streams.

Resampling loops draw one child stream per resample from a single
SeedSequence, so results do not depend on how resamples are scheduled.
"""

import logging
from typing import List, Optional

import numpy as np

from triphoton.core.config import settings

logger = logging.getLogger(__name__)


def resolve_seed(seed: Optional[int] = None) -> int:
    """Explicit seed, else TRIPHOTON_SEED, else fresh OS entropy"""
    if seed is not None:
        return int(seed)
    if settings.SEED is not None:
        return int(settings.SEED)
    entropy = int(np.random.SeedSequence().entropy)
    logger.warning("No seed given; drew fresh entropy %d", entropy)
    return entropy


def make_generator(seed: Optional[int] = None) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(resolve_seed(seed)))


def spawn_generators(seed: Optional[int], count: int) -> List[np.random.Generator]:
    """Independent generators, one per resample, in a fixed order"""
    children = np.random.SeedSequence(resolve_seed(seed)).spawn(count)
    return [np.random.default_rng(child) for child in children]
