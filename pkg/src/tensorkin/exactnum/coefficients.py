"""Closed-form constants of the kinematic formulae for tensorial curvature measures.

Indices follow one convention throughout: ``n`` is the ambient dimension,
``j`` the degree of the measure on the intersection, ``k`` the degree on the
fixed body, ``s`` the power of the normal vector, ``l`` the power of the face
metric, ``m`` the number of metric factors split off the normal part and
``i`` the number of those that are absorbed into the face metric.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .gamma import binom, gamma, gamma_ratio, omega, rgamma, rising_ratio_l
from .ring import ONE, SQRT_PI, ZERO, DomainError, ExactReal

half = Fraction(1, 2)


def _h(k) -> Fraction:
    return Fraction(k, 2)


def _pi_pow(e) -> ExactReal:
    return ExactReal.pi_power(e)


@dataclass(frozen=True)
class CoeffIndex:
    """Index tuple of a coefficient in the general kinematic formula."""

    n: int
    j: int
    k: int
    s: int
    l: int
    i: int
    m: int

    def __post_init__(self):
        vals = (self.n, self.j, self.k, self.s, self.l, self.i, self.m)
        if any((not isinstance(v, int)) or v < 0 for v in vals):
            raise DomainError(f"indices must be nonnegative integers: {self}")
        if not self.j <= self.k <= self.n:
            raise DomainError(f"need j <= k <= n: {self}")
        if self.m > self.s // 2:
            raise DomainError(f"need m <= s//2: {self}")
        if self.i > self.m:
            raise DomainError(f"need i <= m: {self}")
        if self.j == 0 and self.l != 0:
            raise DomainError(f"l must vanish for j = 0: {self}")


@lru_cache(maxsize=None)
def alpha_njk(n: int, j: int, k: int) -> ExactReal:
    """Coefficient of the principal kinematic formula for curvature measures."""
    if not 0 <= j <= k <= n:
        raise DomainError(f"need 0 <= j <= k <= n, got {(n, j, k)}")
    return (gamma(_h(k + 1)) * gamma(_h(n - k + j + 1))
            / (gamma(_h(j + 1)) * gamma(_h(n + 1))))


@lru_cache(maxsize=None)
def c_normalizing(n: int, j: int, r: int, s: int, l: int) -> ExactReal:
    """Normalizing constant of the generalized tensorial curvature measure."""
    if n < 1 or not 0 <= j <= n or min(r, s, l) < 0:
        raise DomainError(f"invalid indices {(n, j, r, s, l)}")
    if j == n:
        if s != 0:
            raise DomainError("s must vanish for j = n")
        return ExactReal.rational(Fraction(1, factorial(r))) * omega(n + 2 * l) / omega(n)
    pref = ExactReal.rational(Fraction(1, factorial(r) * factorial(s)))
    if j == 0:
        if l >= 1:
            return ONE
        return pref * omega(n) / omega(n + s)
    return pref * omega(n - j) / omega(n - j + s) * omega(j + 2 * l) / omega(j)


def _closed_form(n, j, k, s, l, i, m) -> ExactReal:
    # Valid for j <= k <= n; at k = j the last ratio collapses to 1{m = 0}.
    rr = rising_ratio_l(i, l)
    if rr == 0 or binom(m, i) == 0:
        return ZERO
    scal = Fraction((-1) ** i * binom(m, i), 4**m * factorial(m)) * rr
    out = ExactReal.rational(scal) * _pi_pow(-(m + i)) * alpha_njk(n, j, k)
    out = out * gamma(_h(k) + 1) / gamma(_h(j) + 1)
    out = out * gamma(_h(j + s) - m + 1) / gamma(_h(k + s) + 1)
    return out * gamma_ratio(_h(k - j) + m, _h(k - j))


def c_kinematic_raw(idx: CoeffIndex) -> ExactReal:
    """The general closed form evaluated at any k, including k = n.

    At ``k = n`` this is the coefficient before the terms with equal
    ``l + i`` are merged; :func:`c_kinematic` returns the merged one instead.
    """
    return _closed_form(idx.n, idx.j, idx.k, idx.s, idx.l, idx.i, idx.m)


@lru_cache(maxsize=None)
def c_nj_s(n: int, j: int, s: int) -> ExactReal:
    """Constant of the merged k = n term."""
    if not 0 <= j <= n - 1 or s < 0:
        raise DomainError(f"need 0 <= j <= n-1, got {(n, j, s)}")
    if s % 2:
        return ZERO
    pref = ExactReal.rational(Fraction(1, 2**s * factorial(s // 2))) * _pi_pow(-s)
    return pref * gamma(_h(n - j + s)) / gamma(_h(n - j))


@lru_cache(maxsize=None)
def _c_kinematic_cached(idx: CoeffIndex) -> ExactReal:
    if idx.k == idx.j:
        return ONE if idx.i == idx.m == 0 else ZERO
    if idx.k == idx.n:
        if idx.s % 2 == 0 and idx.m == idx.i == idx.s // 2:
            return c_nj_s(idx.n, idx.j, idx.s)
        return ZERO
    return c_kinematic_raw(idx)


def c_kinematic(idx: CoeffIndex) -> ExactReal:
    """Coefficient c_{n,j,k}^{s,l,i,m} of the general kinematic formula."""
    return _c_kinematic_cached(idx)


def c_special(idx: CoeffIndex, variant: str) -> ExactReal:
    """Coefficient of the specialized formulas for l = 1 (``"l1"``) and l = 0 (``"l0"``).

    These are written without the rising ratio: for l = 1 only i = 0 survives,
    for l = 0 only i ∈ {0, 1} and the sign cancels.  Outside that support the
    coefficient is 0.  At ``k = n`` the unmerged closed form is returned, to be
    paired with ``Q^{m-i} φ_n^{r,0,l+i}``.
    """
    n, j, k, s, l, i, m = idx.n, idx.j, idx.k, idx.s, idx.l, idx.i, idx.m
    if variant == "l1":
        if l != 1:
            raise DomainError("variant l1 needs l = 1")
        if i != 0:
            return ZERO
        pre = ExactReal.rational(Fraction(1, 4**m * factorial(m))) * _pi_pow(-m)
    elif variant == "l0":
        if l != 0:
            raise DomainError("variant l0 needs l = 0")
        if i > 1:
            return ZERO
        pre = (ExactReal.rational(Fraction(binom(m, i), 4**m * factorial(m)))
               * _pi_pow(-(m + i)))
    else:
        raise DomainError(f"unknown variant {variant!r}")
    if pre.is_zero():
        return ZERO
    out = pre * alpha_njk(n, j, k) * gamma(_h(k) + 1) / gamma(_h(j) + 1)
    out = out * gamma(_h(j + s) - m + 1) / gamma(_h(k + s) + 1)
    return out * gamma_ratio(_h(k - j) + m, _h(k - j))


# -- coefficient pipeline ------------------------------------------------------


@lru_cache(maxsize=None)
def d_coeff(n: int, j: int, k: int) -> ExactReal:
    """Constant of the Grassmannian transformation formula."""
    if not 0 <= j <= k <= n:
        raise DomainError(f"need 0 <= j <= k <= n, got {(n, j, k)}")
    out = ONE
    for i in range(1, k - j + 1):
        out = out * gamma(_h(i)) * gamma(_h(n - k + j + i)) / (
            gamma(_h(j + i)) * gamma(_h(n - k + i)))
    return out


@lru_cache(maxsize=None)
def e_coeff(n: int, k: int, r: int, a: int) -> ExactReal:
    """Constant of the subspace-determinant moment formula (needs k + r >= n)."""
    if not (0 <= k <= n and 0 <= r <= n and k + r >= n and a >= 0):
        raise DomainError(f"need k + r >= n, got {(n, k, r, a)}")
    out = ONE
    for p in range(n - r):
        out = out * gamma(_h(n - p)) * gamma(_h(k - p + a)) / (
            gamma(_h(n - p + a)) * gamma(_h(k - p)))
    return out


def _check_inner(n, j, k):
    if not 0 < j < k < n:
        raise DomainError(f"need 0 < j < k < n, got {(n, j, k)}")


@lru_cache(maxsize=None)
def b_coeff(n: int, j: int, k: int, s: int, l: int, i: int) -> ExactReal:
    _check_inner(n, j, k)
    rr = rising_ratio_l(i, l)
    if rr == 0:
        return ZERO
    out = ExactReal.rational(Fraction(factorial(k) * factorial(n - k - 1), 2 ** (n - j) * factorial(j)) * rr)
    out = out * gamma(_h(k)) / (SQRT_PI * gamma(_h(j)) * gamma(_h(n - j + s)))
    return out * gamma(_h(j) + l) * gamma(_h(k - j) + i) / gamma(_h(k) + l + i)


@lru_cache(maxsize=None)
def a_hat_raw(n: int, j: int, k: int, s: int, i: int, m: int) -> ExactReal:
    """The quadruple sum over (y, β, γ, δ), evaluated term by term."""
    _check_inner(n, j, k)
    total = ZERO
    hs = s // 2
    for y in range(0, m - i + 1):
        for be in range(y, hs + 1):
            for ga in range(max(m - be, 0), hs - be + 1):
                for de in range(max(i - be + y, 0), ga + 1):
                    comb_part = (binom(s, 2 * be) * binom(be, y) * binom(s - 2 * be, 2 * ga)
                                 * binom(ga, de) * binom(be + de - y, i)
                                 * binom(be + ga - y - i, m - y - i))
                    if comb_part == 0:
                        continue
                    den = rgamma(_h(n - k + 1) + be - _h(s))
                    if den.is_zero():
                        continue
                    sign = -1 if (m + y + ga + de) % 2 else 1
                    term = ExactReal.rational(sign * comb_part)
                    term = term * gamma(be + half) * gamma(ga + half)
                    term = term * gamma(_h(j + s) - be - ga + 1) / gamma(_h(k + s) - be + 1) * den
                    term = term * gamma(_h(n - k + j + 1) + be + de - y - i) / gamma(_h(n + 1) + be + de - y)
                    total = total + term
    return total


@lru_cache(maxsize=None)
def a_closed(n: int, j: int, k: int, s: int, i: int, m: int) -> ExactReal:
    """Closed form of the simplified multi-sum."""
    _check_inner(n, j, k)
    c = binom(s - 2 * i, 2 * m - 2 * i)
    if c == 0:
        return ZERO
    out = ExactReal.rational((-1) ** i * c) * gamma(m - i + half) * gamma(_h(n - k + j + 1))
    out = out / (gamma(_h(n + 1)) * gamma(_h(n - k + 1)) * gamma(_h(n - k)) * gamma(_h(k + s) + 1))
    out = out * gamma(_h(n - k + s) - m) * gamma(_h(j + s) - m + 1)
    return out * gamma(_h(k - j) + m) / gamma(_h(k - j) + i)


@dataclass(frozen=True)
class PipelineCoeffs:
    d: ExactReal
    e: ExactReal
    b: ExactReal
    a_hat_raw: ExactReal
    a_closed: ExactReal
    c_assembled: ExactReal


def pipeline_coeffs(n: int, j: int, k: int, s: int, l: int, i: int, m: int) -> PipelineCoeffs:
    """Every intermediate constant of the coefficient derivation for one index.

    ``d`` is d_{n,j,k} and ``e`` is e_{n-j, n-k, k-j, j+2}; their product is
    (n-k+j)! k! / (n! j!).  ``c_assembled`` is built from the raw multi-sum,
    so comparing it with :func:`c_kinematic` checks the whole chain.
    """
    CoeffIndex(n, j, k, s, l, i, m)
    _check_inner(n, j, k)
    d = d_coeff(n, j, k)
    e = e_coeff(n - j, n - k, k - j, j + 2)
    b = b_coeff(n, j, k, s, l, i)
    raw = a_hat_raw(n, j, k, s, i, m)
    closed = a_closed(n, j, k, s, i, m)
    norm = gamma(i + half) * binom(s, 2 * i)
    a = raw / norm if not raw.is_zero() else ZERO
    c = (omega(n - k) * omega(k - j) / omega(n - j)
         * c_normalizing(n, j, 0, s, l) / c_normalizing(n, k, 0, s - 2 * m, l + i)
         * norm * b * a)
    return PipelineCoeffs(d=d, e=e, b=b, a_hat_raw=raw, a_closed=closed, c_assembled=c)
