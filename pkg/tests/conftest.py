import numpy as np
import pytest

from thmc import PathTable, klotz_table
from thmc.core import all_paths


@pytest.fixture(scope="session")
def klotz() -> PathTable:
    return klotz_table()


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


def random_table(rng: np.random.Generator, T: int, n: int) -> PathTable:
    """A table of n paths drawn uniformly over {1,2}^T."""
    paths = list(all_paths(T))
    counts: dict = {}
    for i in rng.integers(0, len(paths), size=n):
        p = paths[int(i)]
        counts[p] = counts.get(p, 0) + 1
    return PathTable(T, counts)
