import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fedmlfs.fuzzy import build_similarity_matrix


@pytest.fixture
def toy_pair():
    """The worked three-instance example used across the entropy tests."""
    f = build_similarity_matrix([0.0, 0.1, 0.9], 0.2)
    g = build_similarity_matrix([0.0, 0.5, 0.6], 0.2)
    return f, g


def random_similarity(rng, n=None, radius=None):
    n = n or int(rng.integers(2, 51))
    radius = radius if radius is not None else float(rng.uniform(0.0, 1.0))
    col = rng.random(n)
    return build_similarity_matrix(col, radius)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
