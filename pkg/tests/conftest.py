import numpy as np
import pytest

from maosampler.potentials import gaussian, pi1, pi2, radial_alpha


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def builtin_targets(dim):
    return [pi1(dim, 1.0), pi1(dim, 2.5), pi2(dim), radial_alpha(dim, 4.0),
            radial_alpha(dim, 3.0), gaussian(dim, 1.0), gaussian(dim, 2.0)]
