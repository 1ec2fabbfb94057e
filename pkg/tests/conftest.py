"""
Shared fixtures for the triphoton test suite.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from triphoton.core.io import load_bundled_matrix  # noqa: E402
from triphoton.core.schemas import TransferMatrix  # noqa: E402
from triphoton.engine.design_eval import ideal_tritter  # noqa: E402


@pytest.fixture
def tritter() -> TransferMatrix:
    return ideal_tritter()


@pytest.fixture
def device() -> TransferMatrix:
    """Published reconstruction of the fabricated tritter, 3-decimal entries"""
    return load_bundled_matrix()


@pytest.fixture
def splitter() -> TransferMatrix:
    return TransferMatrix(entries=np.array([[1, 1], [1, -1]]) / np.sqrt(2))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
