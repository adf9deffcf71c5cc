"""Integration rules: exact trigonometric moments, spherical polygons, simplices."""

from __future__ import annotations

from functools import lru_cache
import math
from math import comb

import numpy as np

from .symtensor import SymTensor, monomials, multinomial


@lru_cache(maxsize=None)
def gauss_legendre01(q: int) -> tuple[np.ndarray, np.ndarray]:
    """q-point Gauss–Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (x + 1.0), 0.5 * w


def trig_moment(p: int, q: int, t0: float, t1: float) -> float:
    """∫_{t0}^{t1} cos^p θ sin^q θ dθ, exact up to rounding.

    The integrand is expanded in e^{ikθ}; each exponential integrates in
    closed form.
    """
    # (e^{iθ} + e^{-iθ})^p (e^{iθ} - e^{-iθ})^q / (2^p (2i)^q)
    coef = np.zeros(2 * (p + q) + 1, dtype=complex)
    for a in range(p + 1):
        for b in range(q + 1):
            k = (a - (p - a)) + (b - (q - b))
            coef[k + p + q] += comb(p, a) * comb(q, b) * (-1) ** (q - b)
    coef /= 2.0**p * (2j) ** q
    total = 0.0 + 0.0j
    for idx, c in enumerate(coef):
        if c == 0:
            continue
        k = idx - (p + q)
        if k == 0:
            total += c * (t1 - t0)
        else:
            total += c * (np.exp(1j * k * t1) - np.exp(1j * k * t0)) / (1j * k)
    return float(total.real)


def arc_moment(a: np.ndarray, w: np.ndarray, t0: float, t1: float, s: int) -> SymTensor:
    """∫_{t0}^{t1} ⟨cos θ a + sin θ w, x⟩^s dθ as a rank-s tensor (a ⊥ w unit)."""
    n = len(a)
    out = np.zeros(len(monomials(n, s)))
    mons = monomials(n, s)
    for k in range(s + 1):
        tm = trig_moment(s - k, k, t0, t1)
        if tm == 0.0:
            continue
        # coefficients of ⟨a,x⟩^{s-k} ⟨w,x⟩^k
        out += comb(s, k) * tm * _product_power_coeffs(a, s - k, w, k, mons)
    return SymTensor.from_vector(n, s, out)


def _product_power_coeffs(a, p, w, q, mons) -> np.ndarray:
    from .symtensor import power_of_vector, sym_mul

    T = sym_mul(power_of_vector(a, p), power_of_vector(w, q))
    return np.array([T.coordinate(e) for e in mons])


def arc_intervals_in_cap(a, w, theta: float, v, tau: float) -> list[tuple[float, float]]:
    """Sub-intervals of [0, θ] where ⟨cos t a + sin t w, v⟩ ≥ τ."""
    A, B = float(a @ v), float(w @ v)
    R = float(np.hypot(A, B))
    if tau <= -R:
        return [(0.0, theta)]
    if tau > R:
        return []
    phi = float(np.arctan2(B, A))
    delta = float(np.arccos(min(1.0, tau / R))) if R > 0 else np.pi
    out = []
    for shift in (-2 * np.pi, 0.0, 2 * np.pi):
        lo, hi = max(0.0, phi - delta + shift), min(theta, phi + delta + shift)
        if hi > lo:
            out.append((lo, hi))
    return out


def power_sum_coeffs(U: np.ndarray, weights: np.ndarray, s: int) -> np.ndarray:
    """Coefficient vector of Σ_q w_q ⟨U_q, x⟩^s (rows of U)."""
    n = U.shape[1]
    mons = monomials(n, s)
    out = np.empty(len(mons))
    for idx, e in enumerate(mons):
        out[idx] = multinomial(e) * float(weights @ np.prod(U ** np.asarray(e), axis=1))
    return out


@lru_cache(maxsize=None)
def duffy_square(q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tensor Gauss rule on [0,1]² for the collapsed-triangle parametrization."""
    x, w = gauss_legendre01(q)
    xi, eta = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    return xi.ravel(), eta.ravel(), W.ravel()


def spherical_triangle_nodes(p0, p1, p2, q: int = 40) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on S² and weights integrating over the geodesic triangle (p0, p1, p2).

    The flat triangle is collapsed onto the unit square at p0 and mapped to
    the sphere by central projection, dσ = |det(p, ∂ξp, ∂ηp)| / |p|³.
    """
    xi, eta, W = duffy_square(q)
    P = ((1 - xi)[:, None] * p0 + xi[:, None] * ((1 - eta)[:, None] * p1 + eta[:, None] * p2))
    dxi = -p0 + (1 - eta)[:, None] * p1 + eta[:, None] * p2
    deta = xi[:, None] * (p2 - p1)[None, :]
    jac = np.abs(np.einsum("ij,ij->i", P, np.cross(dxi, deta)))
    r = np.linalg.norm(P, axis=1)
    return P / r[:, None], W * jac / r**3


MAX_EDGE_COS = math.cos(1.0)


def spherical_polygon_nodes(gens: np.ndarray, q: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature for the spherical polygon cut out by the cone over ``gens`` (rows, R³).

    The generators must span a pointed cone; their cyclic order is recovered
    around the mean direction.
    """
    G = gens / np.linalg.norm(gens, axis=1, keepdims=True)
    axis = G.mean(axis=0)
    axis /= np.linalg.norm(axis)
    e1 = G[0] - (G[0] @ axis) * axis
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    order = np.argsort(np.arctan2(G @ e2, G @ e1))
    G = G[order]
    # wide triangles are badly distorted by the central projection, so split
    # them at geodesic midpoints until every edge is short
    stack = [(G[0], G[i], G[i + 1]) for i in range(1, len(G) - 1)]
    nodes, weights = [], []
    while stack:
        a, b, c = stack.pop()
        if min(a @ b, b @ c, c @ a) < MAX_EDGE_COS:
            ab, bc, ca = (a + b, b + c, c + a)
            ab, bc, ca = ab / np.linalg.norm(ab), bc / np.linalg.norm(bc), ca / np.linalg.norm(ca)
            stack.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
            continue
        X, w = spherical_triangle_nodes(a, b, c, q)
        nodes.append(X)
        weights.append(w)
    return np.vstack(nodes), np.concatenate(weights)


@lru_cache(maxsize=None)
def simplex_rule(j: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric nodes (Q×(j+1)) and weights summing to 1 on the reference j-simplex.

    Collapsed Gauss–Legendre product rule; exact for total degree ≤ 2q - j.
    """
    if j == 0:
        return np.ones((1, 1)), np.ones(1)
    x, w = gauss_legendre01(q)
    grids = np.meshgrid(*([x] * j), indexing="ij")
    wgrids = np.meshgrid(*([w] * j), indexing="ij")
    T = np.stack([g.ravel() for g in grids], axis=1)
    Wt = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    # Duffy collapse: λ_0 = 1 - t_0, λ_1 = t_0 (1 - t_1), …, λ_j = t_0 ··· t_{j-1}
    lam = np.zeros((T.shape[0], j + 1))
    remain = np.ones(T.shape[0])
    for d in range(j):
        lam[:, d] = remain * (1 - T[:, d])
        remain = remain * T[:, d]
    lam[:, j] = remain
    W = Wt * _duffy_jacobian(T, j)
    return lam, W / W.sum()


def _duffy_jacobian(T: np.ndarray, j: int) -> np.ndarray:
    # λ_0 = 1 - t_0, λ_1 = t_0 (1 - t_1), … : |∂λ/∂t| = Π_d t_d^{j-1-d}
    out = np.ones(T.shape[0])
    for d in range(j):
        out *= T[:, d] ** (j - 1 - d)
    return out
