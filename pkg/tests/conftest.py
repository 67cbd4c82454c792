import numpy as np
import pytest

from spinfid import build_sector_basis


@pytest.fixture(scope="session")
def basis_cache():
    cache = {}

    def get(L, n_up=None):
        key = (L, L // 2 if n_up is None else n_up)
        if key not in cache:
            cache[key] = build_sector_basis(*key)
        return cache[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
