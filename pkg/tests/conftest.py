import numpy as np
import pytest

from rbmnet import _rng
from rbmnet.rbm import Rbm


def random_rbm(rng, n_vis, n_hid, w_scale=2.0, b_scale=1.0):
    return Rbm(rng.uniform(-w_scale, w_scale, size=(n_vis, n_hid)),
               rng.uniform(-b_scale, b_scale, size=n_vis),
               rng.uniform(-b_scale, b_scale, size=n_hid))


@pytest.fixture
def rng():
    return _rng.substream(2024, _rng.TRIAL)


@pytest.fixture
def edge_rbm():
    """Hidden-degree-2 RBM realizing a single Ising edge of weight 0.5."""
    w = float(np.arctanh(np.sqrt(np.tanh(0.5))))
    return Rbm(np.array([[w], [w]]), np.zeros(2), np.zeros(1))
