import numpy as np
import pytest

from fairib import SYNTHETIC_V1, make_joint, spec_to_joint


@pytest.fixture(scope="session")
def synth():
    return spec_to_joint(SYNTHETIC_V1)


def random_joint(rng, n_a, n_x, n_y, conc=1.0):
    """Generic joint (A -> X -> Y need not hold) with every x represented."""
    p = rng.dirichlet(np.full(n_a * n_x * n_y, conc)).reshape(n_a, n_x, n_y)
    return make_joint(p)


def random_markov_joint(rng, n_a, n_x, n_y):
    p_a = rng.dirichlet(np.ones(n_a))
    pxa = rng.dirichlet(np.ones(n_x), size=n_a)
    pyx = rng.dirichlet(np.ones(n_y), size=n_x)
    return make_joint(p_a[:, None, None] * pxa[:, :, None] * pyx[None])


def interior_encoder(rng, n_x, n_u, floor=0.05):
    q = rng.dirichlet(np.ones(n_u), size=n_x)
    return (1 - floor) * q + floor / n_u
