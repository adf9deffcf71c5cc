import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorkin.subspaces import RngStream, haar_rotations
from tensorkin.symtensor import (
    ShapeError,
    SymTensor,
    axpy,
    from_probe_values,
    linear_form,
    max_abs_diff,
    metric_q,
    monomials,
    multinomial,
    power_of_vector,
    probe_basis,
    q_of_subspace,
    sym_mul,
    sym_pow,
)

dims = st.integers(2, 4)
ranks = st.integers(0, 4)


def random_tensor(rng: np.random.Generator, n: int, p: int) -> SymTensor:
    return SymTensor.from_vector(n, p, rng.normal(size=len(monomials(n, p))))


@pytest.mark.parametrize("n,p", [(2, 3), (3, 2), (4, 4)])
def test_monomial_count_and_order(n, p):
    mons = monomials(n, p)
    assert len(mons) == math.comb(n + p - 1, p)
    assert list(mons) == sorted(mons, reverse=True)
    assert all(sum(e) == p for e in mons)


def test_multinomial():
    assert multinomial((2, 1, 0)) == 3
    assert multinomial((1, 1, 1)) == 6


@settings(max_examples=60, deadline=None)
@given(dims, ranks, ranks, st.integers(0, 2**32 - 1))
def test_product_is_pointwise(n, p, q, seed):
    rng = np.random.default_rng(seed)
    a, b = random_tensor(rng, n, p), random_tensor(rng, n, q)
    x = rng.normal(size=n)
    assert math.isclose(sym_mul(a, b)(x), a(x) * b(x), rel_tol=1e-9, abs_tol=1e-9)


@settings(max_examples=60, deadline=None)
@given(dims, st.integers(0, 5), st.integers(0, 2**32 - 1))
def test_power_of_vector_and_linear_form(n, s, seed):
    rng = np.random.default_rng(seed)
    u, x = rng.normal(size=n), rng.normal(size=n)
    assert math.isclose(power_of_vector(u, s)(x), float(u @ x) ** s, rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose(linear_form(u)(x), float(u @ x), rel_tol=1e-12, abs_tol=1e-12)
    assert max_abs_diff(sym_pow(linear_form(u), s), power_of_vector(u, s)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(dims, st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_rotation_matches_pullback(n, p, seed):
    rng = np.random.default_rng(seed)
    T = random_tensor(rng, n, p)
    R = haar_rotations(RngStream(seed, "t"), n, 1)[0]
    x = rng.normal(size=n)
    # (ϑT)(x) = T(ϑ^T x)
    assert math.isclose(T.rotate(R)(x), T(R.T @ x), rel_tol=1e-9, abs_tol=1e-9)


def test_metric_is_rotation_invariant():
    R = haar_rotations(RngStream(3, "q"), 3, 1)[0]
    for i in range(3):
        assert max_abs_diff(sym_pow(metric_q(3), i).rotate(R), sym_pow(metric_q(3), i)) < 1e-12


def test_q_of_subspace():
    B = np.array([[1.0, 0.0, 0.0]])
    Q1 = q_of_subspace(B, 3)
    assert Q1.coordinate((2, 0, 0)) == 1.0 and Q1.coordinate((0, 2, 0)) == 0.0
    assert max_abs_diff(q_of_subspace(np.eye(3), 3), metric_q(3)) < 1e-15
    assert q_of_subspace(np.zeros((0, 3)), 3).is_zero()
    x = np.array([0.3, -1.2, 2.0])
    V = np.linalg.qr(np.random.default_rng(1).normal(size=(3, 2)))[0].T
    assert math.isclose(q_of_subspace(V, 3)(x), float(np.sum((V @ x) ** 2)), rel_tol=1e-12)


@pytest.mark.parametrize("n,p", [(2, 0), (2, 4), (3, 3), (3, 6), (4, 2)])
def test_probe_basis_reconstructs(n, p):
    rng = np.random.default_rng(n * 10 + p)
    T = random_tensor(rng, n, p)
    X, W = probe_basis(n, p)
    vals = np.array([T(x) for x in X])
    assert np.allclose(W @ vals, T.to_vector(), atol=1e-9)
    assert np.allclose(from_probe_values(n, p, vals), T.to_vector(), atol=1e-9)


def test_json_round_trip_and_format():
    T = SymTensor(2, 2, {(2, 0): 1.5, (0, 2): -0.25})
    data = T.to_json()
    assert data == {"dim": 2, "rank": 2, "coeffs": {"2,0": 1.5, "0,2": -0.25}}
    assert SymTensor.from_json(data) == T


def test_arithmetic_and_shape_checks():
    a = SymTensor(2, 1, {(1, 0): 1.0})
    b = SymTensor(2, 1, {(0, 1): 2.0})
    assert (a + b)([1.0, 1.0]) == 3.0
    assert axpy(2.0, a, b)([1.0, 1.0]) == 4.0
    assert (a - a).is_zero()
    with pytest.raises(ShapeError):
        a + SymTensor.zero(2, 2)
    with pytest.raises(ShapeError):
        SymTensor(2, 2, {(1, 0): 1.0})
