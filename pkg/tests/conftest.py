import numpy as np
import pytest
from hypothesis import settings

from ocwitness.quantum import PMProtocol, random_density_matrix, random_povm
from ocwitness.tasks import FunctionalCCTask, RelationalCCTask

settings.register_profile("ocwitness", max_examples=40, deadline=None)
settings.load_profile("ocwitness")


def random_prior(rng, n_x, n_y, sparse=False):
    p = rng.random((n_x, n_y))
    if sparse:
        p[rng.random((n_x, n_y)) < 0.3] = 0.0
        if p.sum() == 0:
            p[0, 0] = 1.0
    return p / p.sum()


def random_functional_task(rng, n_x=None, n_y=None, d=None):
    n_x = n_x or int(rng.integers(1, 5))
    n_y = n_y or int(rng.integers(1, 4))
    d = d or int(rng.integers(2, 4))
    f = rng.integers(0, 2, size=(n_x, n_y))
    return FunctionalCCTask(f, random_prior(rng, n_x, n_y), d=d)


def random_relational_task(rng, n_x=None, n_y=None, n_z=None, d=2):
    n_x = n_x or int(rng.integers(1, 5))
    n_y = n_y or int(rng.integers(1, 4))
    n_z = n_z or 2 * int(rng.integers(1, 3))
    rel = rng.random((n_x, n_y, n_z)) < 0.4
    for x in range(n_x):
        for y in range(n_y):
            if not rel[x, y].any():
                rel[x, y, rng.integers(n_z)] = True
    flip = np.arange(n_z) ^ 1
    return RelationalCCTask(rel, random_prior(rng, n_x, n_y), d=d, flip=flip)


def random_pm_protocol(rng, dim, n_x, n_y, n_z=2):
    states = [random_density_matrix(dim, rng, rank=int(rng.integers(1, dim + 1))) for _ in range(n_x)]
    measurements = [random_povm(dim, n_z, rng) for _ in range(n_y)]
    return PMProtocol(states, measurements)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
