import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorkin.subspaces import (
    RngStream,
    Subspace,
    complement,
    grassmannian_bases,
    gram_determinant,
    haar_rotations,
    intersect_subspaces,
    normalize_project,
    principal_cosines,
    project,
    relative_grassmannian_bases,
    sample_grassmannian,
    sample_grassmannian_in,
    sample_sphere,
    sphere_points,
    subspace_determinant,
)


def test_streams_are_deterministic_and_label_separated():
    a = RngStream(7, "x").normal(5)
    assert np.array_equal(a, RngStream(7, "x").normal(5))
    assert not np.array_equal(a, RngStream(7, "y").normal(5))
    assert not np.array_equal(a, RngStream(8, "x").normal(5))
    assert RngStream(7, "x").substream("z").label == "x/z"
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(1 << 64)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_haar_rotations_are_special_orthogonal_and_uniform(n):
    R = haar_rotations(RngStream(1, "h"), n, 20000)
    assert np.allclose(R @ np.swapaxes(R, 1, 2), np.eye(n), atol=1e-12)
    assert np.allclose(np.linalg.det(R), 1.0)
    # Haar: every entry has mean 0 and second moment 1/n
    se = 1 / np.sqrt(20000)
    assert np.all(np.abs(R.mean(axis=0)) < 5 * se)
    assert np.all(np.abs((R**2).mean(axis=0) - 1 / n) < 5 * se)


def test_sphere_points_moments():
    U = sphere_points(RngStream(2, "s"), 3, 50000)
    assert np.allclose(np.linalg.norm(U, axis=1), 1.0)
    assert np.allclose(U.T @ U / len(U), np.eye(3) / 3, atol=0.01)


@pytest.mark.parametrize("n,k", [(3, 1), (3, 2), (4, 2), (4, 0), (3, 3)])
def test_grassmannian_projector_mean(n, k):
    B = grassmannian_bases(RngStream(3, "g"), n, k, 20000)
    assert B.shape == (20000, k, n)
    P = np.einsum("nki,nkj->ij", B, B) / len(B)
    assert np.allclose(P, k / n * np.eye(n), atol=0.02)


def test_relative_grassmannian_in_and_around():
    F = sample_grassmannian(RngStream(4, "F"), 4, 2)
    sub = relative_grassmannian_bases(RngStream(4, "a"), F, 1, 100)
    assert np.allclose(np.linalg.norm(sub @ complement(F).basis.T, axis=(1, 2)), 0.0, atol=1e-12)
    sup = relative_grassmannian_bases(RngStream(4, "b"), F, 3, 100)
    for L in sup:
        assert Subspace(4, L).contains(F)
    assert sample_grassmannian_in(RngStream(4, "c"), F, 2).same_as(F)


def test_projection_helpers():
    L = Subspace.span([[1.0, 1.0, 0.0]])
    assert np.allclose(project([1.0, 0.0, 5.0], L), [0.5, 0.5, 0.0])
    assert np.allclose(normalize_project([1.0, 0.0, 5.0], L), np.array([1, 1, 0]) / np.sqrt(2))
    with pytest.raises(ValueError):
        normalize_project([0.0, 0.0, 1.0], L)
    u = sample_sphere(RngStream(1, "u"), L)
    assert L.contains(Subspace.span([u]))


def test_complement_and_intersection():
    L = Subspace.span([[1.0, 0, 0], [0, 1.0, 0]])
    M = Subspace.span([[0, 1.0, 0], [0, 0, 1.0]])
    assert complement(L).same_as(Subspace.span([[0, 0, 1.0]]))
    assert intersect_subspaces(L, M).same_as(Subspace.span([[0, 1.0, 0]]))
    assert intersect_subspaces(L, Subspace.span([[0, 0, 1.0]])).k == 0
    assert complement(Subspace.trivial(3)).k == 3


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 5), st.data())
def test_subspace_determinant_identities(n, data):
    k = data.draw(st.integers(0, n))
    kp = data.draw(st.integers(0, n))
    seed = data.draw(st.integers(0, 2**32))
    L = sample_grassmannian(RngStream(seed, "L"), n, k)
    M = sample_grassmannian(RngStream(seed, "M"), n, kp)
    d = subspace_determinant(L, M)
    assert 0.0 <= d <= 1.0 + 1e-12
    assert np.isclose(d, subspace_determinant(M, L))
    if k in (0, n) or kp in (0, n):
        assert d == 1.0
    elif k + kp <= n:
        # transversal pair: volume of the joined orthonormal bases
        assert np.isclose(d, gram_determinant(L, M), atol=1e-9)
    else:
        assert np.isclose(d, subspace_determinant(complement(L), complement(M)), atol=1e-9)


def test_subspace_determinant_orthogonal_and_shared_line():
    e = np.eye(3)
    assert np.isclose(subspace_determinant(Subspace.span([e[0]]), Subspace.span([e[1]])), 1.0)
    L = Subspace.span([e[0], e[1]])
    th = 0.3
    M = Subspace.span([e[0], np.cos(th) * e[1] + np.sin(th) * e[2]])
    assert np.isclose(subspace_determinant(L, M), np.sin(th))
    assert np.allclose(sorted(principal_cosines(L.basis, M.basis)), [np.cos(th), 1.0])
