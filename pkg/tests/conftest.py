import numpy as np
import pytest

from botsift import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def make_dataset(X, y, names=None) -> Dataset:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if names is None:
        names = tuple(f"f{i}" for i in range(X.shape[1]))
    return Dataset(X, np.asarray(y, dtype=np.int64), tuple(names))
