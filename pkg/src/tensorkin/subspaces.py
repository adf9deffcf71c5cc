"""Linear subspaces, subspace determinants and Haar sampling.

Random draws come from :class:`RngStream`, a Philox counter-based generator
keyed by a seed and a text label.  Batched samplers return stacked arrays
(leading axis = sample) and are what the Monte Carlo harness uses; the
single-draw functions wrap them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

ORTHO_TOL = 1e-12
ANGLE_ZERO_COS = 1.0 - 1e-10
RANK_TOL = 1e-10

_MASK64 = (1 << 64) - 1


def avalanche64(x: int) -> int:
    """SplitMix64 finalizer: a fixed bijection on 64-bit integers."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _label_hash(label: str) -> int:
    return int.from_bytes(hashlib.blake2b(label.encode(), digest_size=8).digest(), "little")


class RngStream:
    """Deterministic random stream identified by ``(seed, label)``.

    Streams with different labels are statistically independent.  A stream
    is meant to have one owner; derive substreams up front for parallel work.
    """

    def __init__(self, seed: int, label: str = ""):
        if not 0 <= int(seed) <= _MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = int(seed)
        self.label = label
        k0 = avalanche64(self.seed ^ avalanche64(_label_hash(label)))
        k1 = avalanche64(k0 ^ 0x9E3779B97F4A7C15)
        self.generator = np.random.Generator(np.random.Philox(key=(k1 << 64) | k0))

    def substream(self, label: str) -> "RngStream":
        return RngStream(self.seed, f"{self.label}/{label}" if self.label else label)

    def normal(self, size=None) -> np.ndarray:
        return self.generator.standard_normal(size)

    def uniform(self, size=None, low=0.0, high=1.0) -> np.ndarray:
        return self.generator.uniform(low, high, size)

    def beta(self, a, b, size=None) -> np.ndarray:
        return self.generator.beta(a, b, size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, label={self.label!r})"


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of R^n given by an orthonormal basis (rows of ``basis``)."""

    n: int
    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float).reshape(-1, self.n)
        if B.shape[0] > self.n:
            raise ValueError("more basis vectors than the ambient dimension")
        if B.shape[0] and np.max(np.abs(B @ B.T - np.eye(B.shape[0]))) > ORTHO_TOL:
            raise ValueError("basis is not orthonormal")
        B = B.copy()
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def span(cls, vectors, n: int | None = None) -> "Subspace":
        """Orthonormalize arbitrary spanning vectors."""
        V = np.atleast_2d(np.asarray(vectors, dtype=float))
        if n is None:
            n = V.shape[1]
        if V.size == 0:
            return cls(n, np.zeros((0, n)))
        U, sv, _ = np.linalg.svd(V.T, full_matrices=False)
        r = int(np.sum(sv > RANK_TOL * max(1.0, sv[0])))
        return cls(n, U[:, :r].T)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, np.eye(n))

    @classmethod
    def trivial(cls, n: int) -> "Subspace":
        return cls(n, np.zeros((0, n)))

    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    def contains(self, other: "Subspace", tol: float = 1e-9) -> bool:
        resid = other.basis - other.basis @ self.projector()
        return bool(np.all(np.abs(resid) <= tol))

    def same_as(self, other: "Subspace", tol: float = 1e-9) -> bool:
        return self.k == other.k and np.allclose(self.projector(), other.projector(), atol=tol)


# -- Haar sampling (batched) --------------------------------------------------


def haar_rotations(rng: RngStream, n: int, count: int) -> np.ndarray:
    """``count`` Haar-distributed rotations of R^n, shape (count, n, n)."""
    G = rng.normal((count, n, n))
    Q, R = np.linalg.qr(G)
    d = np.sign(np.diagonal(R, axis1=1, axis2=2))
    d[d == 0] = 1.0
    Q = Q * d[:, None, :]
    neg = np.linalg.det(Q) < 0
    Q[neg, :, -1] *= -1.0
    return Q


def sphere_points(rng: RngStream, n: int, count: int) -> np.ndarray:
    """Uniform points on the unit sphere of R^n, shape (count, n)."""
    X = rng.normal((count, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def grassmannian_bases(rng: RngStream, n: int, k: int, count: int) -> np.ndarray:
    """Orthonormal bases (count, k, n) of Haar-random k-subspaces of R^n."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if k == 0:
        return np.zeros((count, 0, n))
    Q = haar_rotations(rng, n, count)
    return np.swapaxes(Q[:, :, :k], 1, 2)


def relative_grassmannian_bases(rng: RngStream, F: Subspace, l: int, count: int) -> np.ndarray:
    """Bases (count, l, n) of Haar-random l-subspaces contained in F (l ≤ dim F)
    or containing F (l ≥ dim F)."""
    f = F.k
    if l <= f:
        coeff = grassmannian_bases(rng, f, l, count)  # (count, l, f)
        return coeff @ F.basis
    if l > F.n:
        raise ValueError("subspace dimension exceeds the ambient dimension")
    C = complement(F)
    coeff = grassmannian_bases(rng, C.k, l - f, count)
    extra = coeff @ C.basis
    fixed = np.broadcast_to(F.basis, (count, f, F.n))
    return np.concatenate([fixed, extra], axis=1)


def sample_rotation(rng: RngStream, n: int) -> np.ndarray:
    return haar_rotations(rng, n, 1)[0]


def sample_sphere(rng: RngStream, sub: Subspace) -> np.ndarray:
    if sub.k < 1:
        raise ValueError("cannot sample the sphere of the zero subspace")
    c = sphere_points(rng, sub.k, 1)[0]
    return c @ sub.basis


def sample_grassmannian(rng: RngStream, n: int, k: int) -> Subspace:
    return Subspace(n, grassmannian_bases(rng, n, k, 1)[0])


def sample_grassmannian_in(rng: RngStream, F: Subspace, l: int) -> Subspace:
    if l == F.k:
        return F
    return Subspace(F.n, relative_grassmannian_bases(rng, F, l, 1)[0])


# -- projections and subspace geometry ---------------------------------------


def project(x, L: Subspace) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return (L.basis @ x) @ L.basis


def normalize_project(x, L: Subspace) -> np.ndarray:
    p = project(x, L)
    nrm = np.linalg.norm(p)
    if nrm <= 1e-12:
        raise ValueError("vector is orthogonal to the subspace; projection is degenerate")
    return p / nrm


def complement(L: Subspace) -> Subspace:
    n = L.n
    if L.k == 0:
        return Subspace.full(n)
    if L.k == n:
        return Subspace.trivial(n)
    _, sv, Vt = np.linalg.svd(L.basis, full_matrices=True)
    r = int(np.sum(sv > RANK_TOL))
    return Subspace(n, Vt[r:])


def intersect_subspaces(L: Subspace, M: Subspace) -> Subspace:
    """L ∩ M as the common null space of both complements' projectors."""
    n = L.n
    if L.k == 0 or M.k == 0:
        return Subspace.trivial(n)
    # x = L.basisᵀ a lies in M iff (I - P_M) L.basisᵀ a = 0
    A = L.basis.T - M.projector() @ L.basis.T
    _, sv, Vt = np.linalg.svd(A, full_matrices=True)
    sv_full = np.zeros(L.k)
    sv_full[: len(sv)] = sv
    null = Vt[sv_full <= RANK_TOL]
    if null.shape[0] == 0:
        return Subspace.trivial(n)
    return Subspace.span(null @ L.basis, n)


def principal_cosines(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Cosines of the principal angles between stacked bases A (…,k,n) and B (…,k',n)."""
    M = A @ np.swapaxes(B, -1, -2)
    if M.shape[-1] == 0 or M.shape[-2] == 0:
        return np.zeros(M.shape[:-2] + (0,))
    return np.clip(np.linalg.svd(M, compute_uv=False), 0.0, 1.0)


def subspace_determinants(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Batched [L, L']: product of sines of the nonzero principal angles."""
    c = principal_cosines(A, B)
    sines = np.sqrt(np.maximum(1.0 - c * c, 0.0))
    sines = np.where(c > ANGLE_ZERO_COS, 1.0, sines)
    return np.prod(sines, axis=-1)


def subspace_determinant(L: Subspace, M: Subspace) -> float:
    if L.n != M.n:
        raise ValueError("subspaces live in different ambient spaces")
    if L.k in (0, L.n) or M.k in (0, M.n):
        return 1.0
    return float(subspace_determinants(L.basis, M.basis))


def gram_determinant(L: Subspace, M: Subspace) -> float:
    """√det of the Gram matrix of the joined bases (meaningful for transversal pairs)."""
    V = np.vstack([L.basis, M.basis])
    return float(np.sqrt(max(np.linalg.det(V @ V.T), 0.0)))
