import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emfe_ris.errors import ConvergenceError, DegenerateChannelError, DomainError
from emfe_ris.numerics import db_to_linear, dominant_right_eigvec, is_unit, mrt
from oracles import crandn, jacobi_singular_values, random_unit


@pytest.mark.parametrize("x_db, expected", [(0, 1.0), (10, 10.0), (43, 19952.62314968879)])
def test_db_to_linear(x_db, expected):
    assert db_to_linear(x_db) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_db_to_linear_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        db_to_linear(bad)


def test_mrt_examples():
    np.testing.assert_allclose(mrt([1, 0]), [1, 0])
    np.testing.assert_allclose(mrt([1, 1j]), [1 / math.sqrt(2), -1j / math.sqrt(2)], atol=1e-15)


def test_mrt_achieves_channel_norm(rng):
    h = crandn(rng, 32)
    w = mrt(h)
    norm = math.sqrt(sum(abs(x) ** 2 for x in h))
    ip = h @ w
    assert abs(abs(ip) - norm) < 1e-12
    assert abs(ip.imag) < 1e-12 and ip.real > 0
    assert is_unit(w)


def test_mrt_zero_channel():
    with pytest.raises(DegenerateChannelError):
        mrt(np.zeros(4))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-6, 1e6))
def test_mrt_scale_invariant_and_optimal(seed, scale):
    r = np.random.default_rng(seed)
    h = crandn(r, 8)
    np.testing.assert_allclose(mrt(scale * h), mrt(h), atol=1e-12)
    best = abs(h @ mrt(h))
    for _ in range(20):
        assert abs(h @ random_unit(r, 8)) <= best + 1e-12


def test_dominant_rank_one_is_mrt():
    np.testing.assert_allclose(dominant_right_eigvec(np.array([3.0, 4.0])), [0.6, 0.8])
    np.testing.assert_allclose(dominant_right_eigvec(np.array([[3.0, 4.0]])), [0.6, 0.8])


def test_dominant_identity_rayleigh_quotient():
    v = dominant_right_eigvec(np.eye(2))
    assert is_unit(v)
    assert np.linalg.norm(np.eye(2) @ v) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_dominant_matches_jacobi_svd(seed):
    r = np.random.default_rng(seed)
    g = crandn(r, 4, 4)
    v = dominant_right_eigvec(g)
    sigma_max = jacobi_singular_values(g)[0]
    assert abs(np.linalg.norm(g @ v) - sigma_max) < 1e-8


def test_jacobi_oracle_sane(rng):
    g = crandn(rng, 5, 3)
    np.testing.assert_allclose(jacobi_singular_values(g), np.linalg.svd(g, compute_uv=False), rtol=1e-10)


def test_dominant_beats_sampled_directions(rng):
    g = crandn(rng, 3, 3)
    best = np.linalg.norm(g @ dominant_right_eigvec(g))
    assert all(np.linalg.norm(g @ random_unit(rng, 3)) <= best + 1e-12 for _ in range(2000))


def test_dominant_non_convergence_carries_iterate(rng):
    g = crandn(rng, 4, 4)
    with pytest.raises(ConvergenceError) as info:
        dominant_right_eigvec(g, max_iters=1)
    assert info.value.last_iterate.shape == (4,)


def test_dominant_zero_matrix():
    with pytest.raises(DegenerateChannelError):
        dominant_right_eigvec(np.zeros((3, 3)))


def test_as_row_rejects_matrix():
    with pytest.raises(DomainError):
        mrt(np.ones((2, 2)))
