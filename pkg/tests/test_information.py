import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairib import Encoder, conditional_mutual_information, kl_divergence, lagrangian, mutual_information
from fairib.errors import BadParameter, LengthMismatch
from fairib.information import entropy, information_terms

from . import oracles
from .conftest import random_joint, random_markov_joint

LOG2 = math.log(2)


def test_kl_identical():
    assert kl_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0


def test_kl_point_mass_vs_uniform():
    assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(LOG2, abs=1e-15)


def test_kl_support_violation_is_infinite():
    assert kl_divergence([0.5, 0.5], [1, 0]) == math.inf


def test_kl_length_mismatch():
    with pytest.raises(LengthMismatch):
        kl_divergence([1.0], [0.5, 0.5])


def test_mi_product_is_zero():
    px, py = np.array([0.2, 0.8]), np.array([0.3, 0.3, 0.4])
    assert mutual_information(np.outer(px, py)) == pytest.approx(0.0, abs=1e-15)


def test_mi_diagonal():
    assert mutual_information([[0.5, 0], [0, 0.5]]) == pytest.approx(LOG2, abs=1e-15)


def test_mi_symmetric_channel():
    # frozen from the loop oracle: 0.8 log 1.6 + 0.2 log 0.4
    assert oracles.mi([[0.4, 0.1], [0.1, 0.4]]) == pytest.approx(0.19274475702175753, abs=1e-15)
    assert mutual_information([[0.4, 0.1], [0.1, 0.4]]) == pytest.approx(0.19274475702175753, abs=1e-14)


def test_cmi_independent():
    p = np.einsum("a,b,c->abc", [0.3, 0.7], [0.5, 0.5], [0.1, 0.9])
    assert conditional_mutual_information(p) == pytest.approx(0.0, abs=1e-15)


def test_cmi_copy_given_independent():
    p = np.zeros((2, 2, 2))
    for a in range(2):
        p[a, a, :] = 0.25
    assert conditional_mutual_information(p) == pytest.approx(LOG2, abs=1e-15)


def test_cmi_markov_chain_is_zero():
    rng = np.random.default_rng(3)
    pc = rng.dirichlet(np.ones(3))
    pa_c = rng.dirichlet(np.ones(2), size=3)
    pb_c = rng.dirichlet(np.ones(4), size=3)
    p = np.einsum("c,ca,cb->abc", pc, pa_c, pb_c)
    assert conditional_mutual_information(p) == pytest.approx(0.0, abs=1e-12)


def test_entropy():
    assert entropy([0.25] * 4) == pytest.approx(math.log(4), abs=1e-15)


def test_lagrangian_constant_encoder_is_zero(synth):
    q = Encoder(np.tile([0.1, 0.2, 0.7], (4, 1)))
    for a, b in [(1.0, 0.0), (0.3, 5.0), (2.0, 0.1)]:
        assert lagrangian(synth, q, a, b) == pytest.approx(0.0, abs=1e-15)


def test_lagrangian_identity_encoder(synth):
    p = synth.p
    h_x = entropy(p.sum(axis=(0, 2)))
    i_ax_y = conditional_mutual_information(p)
    i_xy = mutual_information(p.sum(axis=0))
    got = lagrangian(synth, Encoder(np.eye(4)), 0.7, 2.0)
    assert got == pytest.approx(0.7 * h_x + 2.0 * i_ax_y - i_xy, abs=1e-14)


def test_lagrangian_seeded_encoder(synth):
    q = oracles.seeded_encoder()
    frozen = 0.3375682333967447  # oracles.lagrangian(synthetic_v1_tensor(), q, 1, 0.5)
    assert oracles.lagrangian(oracles.synthetic_v1_tensor(), q, 1.0, 0.5) == pytest.approx(frozen, abs=1e-14)
    assert lagrangian(synth, Encoder(q), 1.0, 0.5) == pytest.approx(frozen, abs=1e-12)


@pytest.mark.parametrize("a,b", [(0.0, 1.0), (-1.0, 0.0), (1.0, -0.1), (math.nan, 0.0)])
def test_lagrangian_bad_parameter(synth, a, b):
    with pytest.raises(BadParameter):
        lagrangian(synth, Encoder(np.eye(4)), a, b)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_non_negativity(seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.full(3 * 4 * 2, 0.5)).reshape(3, 4, 2)
    q = rng.dirichlet(np.full(4, 0.5))
    assert kl_divergence(p[0, 0] / p[0, 0].sum(), q[:2] / q[:2].sum()) >= 0
    assert mutual_information(p.sum(axis=2)) >= 0
    assert conditional_mutual_information(p) >= 0


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_cmi_matches_quadruple_sum(seed):
    rng = np.random.default_rng(seed)
    j = random_joint(rng, 2, 3, 2)
    q = rng.dirichlet(np.ones(3), size=3)
    _, i_auy, _ = information_terms(j.p, q)
    _, ref, _ = oracles.joint_terms(j.p, q)
    assert i_auy == pytest.approx(ref, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(seeds, st.floats(0.05, 5.0), st.floats(0.0, 5.0))
def test_lower_bound_and_data_processing(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    j = random_markov_joint(rng, 2, 4, 3)
    q = rng.dirichlet(np.full(3, 0.7), size=4)
    i_xy = mutual_information(j.p.sum(axis=0))
    assert lagrangian(j, Encoder(q), alpha, beta) >= -i_xy - 1e-10
    assert information_terms(j.p, q)[2] <= i_xy + 1e-10
