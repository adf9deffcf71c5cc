"""The Gamma function at half-integers, evaluated exactly."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from .ring import ONE, ZERO, DomainError, ExactReal, as_half_integer


def is_pole(x) -> bool:
    """True when ``x`` is a nonpositive integer."""
    q = Fraction(x)
    return q.denominator == 1 and q <= 0


@lru_cache(maxsize=None)
def _gamma_cached(x: Fraction) -> ExactReal:
    if x.denominator == 1:
        if x <= 0:
            raise DomainError(f"Gamma has a pole at {x}")
        return ExactReal.rational(factorial(int(x) - 1))
    if x > 0:
        # Γ(k + 1/2) = (2k)! / (4^k k!) · √π
        k = int(x - Fraction(1, 2))
        return ExactReal.pi_power(Fraction(1, 2), Fraction(factorial(2 * k), 4**k * factorial(k)))
    # negative half-integers: Γ(x) = Γ(x + 1) / x
    return _gamma_cached(x + 1) * ExactReal.rational(1 / x)


def gamma(x) -> ExactReal:
    """Γ(x) for any half-integer that is not a pole."""
    return _gamma_cached(as_half_integer(x))


def gamma_half(x) -> ExactReal:
    """Γ(x) for a positive half-integer ``x``."""
    q = as_half_integer(x)
    if q <= 0:
        raise DomainError(f"gamma_half needs a positive argument, got {x}")
    return _gamma_cached(q)


def rgamma(x) -> ExactReal:
    """1/Γ(x), which is 0 at the poles."""
    q = as_half_integer(x)
    if is_pole(q):
        return ZERO
    return _gamma_cached(q).inverse()


def rising(x, k: int) -> Fraction:
    """Pochhammer symbol x (x+1) ··· (x+k-1)."""
    out = Fraction(1)
    x = Fraction(x)
    for p in range(k):
        out *= x + p
    return out


def gamma_ratio(a, b) -> ExactReal:
    """Γ(a)/Γ(b) continued through the poles.

    When ``a`` and ``b`` differ by an integer the ratio is a rational function
    of the shared fractional part and has a limit at the poles; that limit is
    returned.  A pole in the denominator alone yields 0, a pole in the
    numerator alone is a :class:`DomainError`.
    """
    a = as_half_integer(a)
    b = as_half_integer(b)
    pa, pb = is_pole(a), is_pole(b)
    if pa and pb:
        # reflection: Γ(a)/Γ(b) -> (-1)^(a-b) Γ(1-b)/Γ(1-a)
        sign = -1 if (a - b) % 2 else 1
        return sign * gamma(1 - b) * rgamma(1 - a)
    if pb:
        return ZERO
    if pa:
        raise DomainError(f"Gamma({a}) is a pole and Gamma({b}) is finite")
    if (a - b).denominator == 1:
        d = int(a - b)
        # Γ(b + d)/Γ(b) = (b)_d, inverse for negative d
        return ExactReal.rational(rising(b, d) if d >= 0 else 1 / rising(a, -d))
    return gamma(a) * gamma(b).inverse()


def gamma_ratio_continued(c, m: int) -> ExactReal:
    """(-1)^m Γ(c+1)/Γ(c-m+1), i.e. the signed falling factorial of ``c``.

    This equals Γ(-c+m)/Γ(-c) whenever the right side is defined and extends
    it to every rational ``c``.
    """
    if m < 0:
        raise DomainError("m must be nonnegative")
    c = Fraction(c)
    out = Fraction(1)
    for p in range(m):
        out *= c - p
    return ExactReal.rational((-1) ** m * out)


def rising_ratio_l(i: int, l: int) -> Fraction:
    """Γ(i+l-1)/Γ(l-1) read through the continuation: (l-1) l ··· (l+i-2)."""
    if i < 0 or l < 0:
        raise DomainError("i and l must be nonnegative")
    return rising(l - 1, i)


def binom(n: int, k: int) -> int:
    """Binomial coefficient that vanishes outside 0 ≤ k ≤ n."""
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


@lru_cache(maxsize=None)
def omega(n: int) -> ExactReal:
    """Surface area of the unit sphere in R^n."""
    if n < 1:
        raise DomainError("omega needs n >= 1")
    return ExactReal.pi_power(Fraction(n, 2), 2) * gamma(Fraction(n, 2)).inverse()


@lru_cache(maxsize=None)
def kappa(n: int) -> ExactReal:
    """Volume of the unit ball in R^n."""
    if n < 0:
        raise DomainError("kappa needs n >= 0")
    if n == 0:
        return ONE
    return ExactReal.pi_power(Fraction(n, 2)) * gamma(Fraction(n, 2) + 1).inverse()
