"""Symmetric tensors over R^n stored as homogeneous polynomials.

A rank-p symmetric tensor T is identified with the polynomial x ↦ T(x, …, x).
Under this identification the symmetric tensor product is polynomial
multiplication, the metric tensor is Σ x_i², and u^s is ⟨u, x⟩^s.
Coefficients are floats keyed by exponent tuples of total degree p.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

ORTHONORMAL_TOL = 1e-12

Exponent = tuple


class ShapeError(ValueError):
    """Dimension or rank mismatch between tensors."""


@lru_cache(maxsize=None)
def monomials(n: int, p: int) -> tuple[Exponent, ...]:
    """Exponent vectors of degree ``p`` in ``n`` variables, in descending lexicographic order."""
    out = []
    for combo in combinations_with_replacement(range(n), p):
        e = [0] * n
        for v in combo:
            e[v] += 1
        out.append(tuple(e))
    return tuple(sorted(set(out), reverse=True))


def multinomial(exps: Sequence[int]) -> int:
    out = math.factorial(sum(exps))
    for e in exps:
        out //= math.factorial(e)
    return out


class SymTensor:
    """Immutable symmetric tensor of fixed dimension and rank."""

    __slots__ = ("dim", "rank", "_c")

    def __init__(self, dim: int, rank: int, coeffs: Mapping[Exponent, float] | None = None):
        if dim < 1 or rank < 0:
            raise ShapeError(f"invalid shape dim={dim} rank={rank}")
        self.dim = dim
        self.rank = rank
        clean: dict[Exponent, float] = {}
        for e, v in (coeffs or {}).items():
            e = tuple(int(a) for a in e)
            if len(e) != dim or sum(e) != rank or min(e) < 0:
                raise ShapeError(f"exponent {e} does not fit dim={dim} rank={rank}")
            v = float(v)
            if v != 0.0:
                clean[e] = clean.get(e, 0.0) + v
        self._c = {e: v for e, v in clean.items() if v != 0.0}

    @classmethod
    def _raw(cls, dim, rank, coeffs) -> "SymTensor":
        obj = object.__new__(cls)
        obj.dim, obj.rank = dim, rank
        obj._c = {e: v for e, v in coeffs.items() if v != 0.0}
        return obj

    @classmethod
    def zero(cls, dim: int, rank: int = 0) -> "SymTensor":
        return cls._raw(dim, rank, {})

    @classmethod
    def scalar(cls, value: float, dim: int) -> "SymTensor":
        return cls._raw(dim, 0, {(0,) * dim: float(value)})

    @property
    def coeffs(self) -> Mapping[Exponent, float]:
        return MappingProxyType(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def coordinate(self, exps: Sequence[int]) -> float:
        return self._c.get(tuple(exps), 0.0)

    def __float__(self):
        if self.rank != 0:
            raise ShapeError("only rank-0 tensors convert to float")
        return self._c.get((0,) * self.dim, 0.0)

    def _same_shape(self, other: "SymTensor"):
        if not isinstance(other, SymTensor):
            raise TypeError(f"expected SymTensor, got {type(other).__name__}")
        if other.dim != self.dim or other.rank != self.rank:
            raise ShapeError(f"shape mismatch ({self.dim},{self.rank}) vs ({other.dim},{other.rank})")

    def __add__(self, other):
        self._same_shape(other)
        out = dict(self._c)
        for e, v in other._c.items():
            out[e] = out.get(e, 0.0) + v
        return SymTensor._raw(self.dim, self.rank, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return SymTensor._raw(self.dim, self.rank, {e: -v for e, v in self._c.items()})

    def __mul__(self, other):
        if isinstance(other, SymTensor):
            return sym_mul(self, other)
        f = float(other)
        return SymTensor._raw(self.dim, self.rank, {e: f * v for e, v in self._c.items()})

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        return self * (1.0 / float(other))

    def __call__(self, x: Sequence[float]) -> float:
        """Evaluate the polynomial T(x, …, x)."""
        x = np.asarray(x, dtype=float)
        total = 0.0
        for e, v in self._c.items():
            total += v * float(np.prod(x ** np.asarray(e)))
        return total

    def __repr__(self):
        terms = " + ".join(f"{v:.6g}*x^{e}" for e, v in sorted(self._c.items(), reverse=True))
        return f"SymTensor(dim={self.dim}, rank={self.rank}, {terms or '0'})"

    def __eq__(self, other):
        if not isinstance(other, SymTensor):
            return NotImplemented
        return self.dim == other.dim and self.rank == other.rank and self._c == other._c

    __hash__ = None

    def to_vector(self) -> np.ndarray:
        """Coefficients in the order of :func:`monomials`."""
        return np.array([self._c.get(e, 0.0) for e in monomials(self.dim, self.rank)])

    @classmethod
    def from_vector(cls, dim: int, rank: int, vec: Iterable[float]) -> "SymTensor":
        mons = monomials(dim, rank)
        vec = list(vec)
        if len(vec) != len(mons):
            raise ShapeError(f"need {len(mons)} coefficients, got {len(vec)}")
        return cls._raw(dim, rank, {e: float(v) for e, v in zip(mons, vec)})

    def rotate(self, R) -> "SymTensor":
        """Push forward by the linear map R: the polynomial x ↦ T(Rᵀx)."""
        R = np.asarray(R, dtype=float)
        n = self.dim
        forms = [linear_form(R[:, i]) for i in range(n)]
        cache: dict[tuple[int, int], SymTensor] = {}

        def power(i, a):
            if (i, a) not in cache:
                cache[(i, a)] = sym_pow(forms[i], a)
            return cache[(i, a)]

        out = SymTensor.zero(n, self.rank)
        for e, v in self._c.items():
            term = SymTensor.scalar(v, n)
            for i, a in enumerate(e):
                if a:
                    term = sym_mul(term, power(i, a))
            out = out + term
        return out

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "rank": self.rank,
            "coeffs": {",".join(map(str, e)): v for e, v in sorted(self._c.items(), reverse=True)},
        }

    @classmethod
    def from_json(cls, data: Mapping | str) -> "SymTensor":
        if isinstance(data, str):
            data = json.loads(data)
        coeffs = {tuple(int(t) for t in k.split(",")): v for k, v in data["coeffs"].items()}
        return cls(int(data["dim"]), int(data["rank"]), coeffs)


def sym_mul(a: SymTensor, b: SymTensor) -> SymTensor:
    """Symmetric product, i.e. polynomial multiplication."""
    if a.dim != b.dim:
        raise ShapeError(f"dimension mismatch {a.dim} vs {b.dim}")
    out: dict[Exponent, float] = {}
    for e1, v1 in a._c.items():
        for e2, v2 in b._c.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = out.get(e, 0.0) + v1 * v2
    return SymTensor._raw(a.dim, a.rank + b.rank, out)


def sym_pow(a: SymTensor, k: int) -> SymTensor:
    if k < 0:
        raise ValueError("negative power")
    out = SymTensor.scalar(1.0, a.dim)
    base = a
    while k:
        if k & 1:
            out = sym_mul(out, base)
        k >>= 1
        if k:
            base = sym_mul(base, base)
    return out


def axpy(alpha: float, a: SymTensor, b: SymTensor) -> SymTensor:
    """alpha·a + b."""
    return a * alpha + b


def max_abs_diff(a: SymTensor, b: SymTensor) -> float:
    a._same_shape(b)
    keys = set(a._c) | set(b._c)
    return max((abs(a._c.get(e, 0.0) - b._c.get(e, 0.0)) for e in keys), default=0.0)


def coordinate(a: SymTensor, exps: Sequence[int]) -> float:
    return a.coordinate(exps)


def linear_form(u: Sequence[float]) -> SymTensor:
    """The rank-1 tensor ⟨u, x⟩."""
    u = [float(v) for v in u]
    n = len(u)
    return SymTensor._raw(n, 1, {tuple(int(i == k) for i in range(n)): u[k] for k in range(n)})


def power_of_vector(u: Sequence[float], s: int) -> SymTensor:
    """⟨u, x⟩^s expanded by the multinomial theorem."""
    u = np.asarray(u, dtype=float)
    n = len(u)
    out = {}
    for e in monomials(n, s):
        out[e] = multinomial(e) * float(np.prod(u ** np.asarray(e)))
    return SymTensor._raw(n, s, out)


def metric_q(n: int) -> SymTensor:
    return SymTensor._raw(n, 2, {tuple(2 * int(i == k) for i in range(n)): 1.0 for k in range(n)})


def q_of_subspace(basis, n: int | None = None) -> SymTensor:
    """Σ_i ⟨b_i, x⟩² for an orthonormal family ``basis``; zero tensor when empty."""
    B = np.asarray(basis, dtype=float)
    if B.size == 0:
        if n is None:
            raise ShapeError("dimension needed for an empty basis")
        return SymTensor.zero(n, 2)
    B = np.atleast_2d(B)
    dim = B.shape[1]
    if np.max(np.abs(B @ B.T - np.eye(B.shape[0]))) > ORTHONORMAL_TOL:
        raise ValueError("basis is not orthonormal")
    # coefficient of x_a x_b is (1 + [a != b]) Σ_i B[i,a] B[i,b]
    G = B.T @ B
    out = {}
    for a in range(dim):
        for b in range(a, dim):
            e = [0] * dim
            e[a] += 1
            e[b] += 1
            out[tuple(e)] = G[a, b] * (1.0 if a == b else 2.0)
    return SymTensor._raw(dim, 2, out)


# -- evaluation at probe points ----------------------------------------------


def _probe_points(n: int, p: int) -> list[tuple[Fraction, ...]]:
    if p == 0:
        return [tuple(Fraction(1) for _ in range(n))]
    # principal lattice of the simplex Σx = 1: unisolvent for degree-p forms
    return [tuple(Fraction(a, p) for a in e) for e in monomials(n, p)]


def _exact_inverse(M: list[list[Fraction]]) -> list[list[Fraction]]:
    size = len(M)
    A = [row[:] + [Fraction(int(i == j)) for j in range(size)] for i, row in enumerate(M)]
    for col in range(size):
        piv = next(r for r in range(col, size) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        A[col] = [v / pv for v in A[col]]
        for r in range(size):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [row[size:] for row in A]


@lru_cache(maxsize=None)
def probe_basis(n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Probe points X (M×n) and matrix W (M×M) with coeffs = W @ [T(X_q)]_q.

    The points form the principal lattice of the standard simplex, on which
    homogeneous polynomials of degree p are uniquely determined.  W is the
    exact rational inverse of the evaluation matrix, rounded once.
    """
    pts = _probe_points(n, p)
    mons = monomials(n, p)
    V = [[_frac_prod(x, e) for e in mons] for x in pts]
    W = _exact_inverse(V)
    X = np.array([[float(v) for v in x] for x in pts])
    Wf = np.array([[float(v) for v in row] for row in W])
    X.setflags(write=False)
    Wf.setflags(write=False)
    return X, Wf


def _frac_prod(x, e) -> Fraction:
    out = Fraction(1)
    for xi, ei in zip(x, e):
        out *= xi**ei
    return out


def from_probe_values(n: int, p: int, values: np.ndarray) -> np.ndarray:
    """Coefficient vectors from polynomial values at the probe points (last axis)."""
    _, W = probe_basis(n, p)
    return np.asarray(values) @ W.T
