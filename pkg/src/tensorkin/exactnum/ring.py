"""Exact arithmetic in the ring Q[√π, 1/√π].

An :class:`ExactReal` is a finite sum ``Σ c_h · π^h`` with rational ``c_h``
and half-integer ``h``.  Every value of the Gamma function at a half-integer
is a single such term, which makes the ring a natural carrier for the
integral-geometric constants handled by this package.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Mapping, Union

import mpmath

Number = Union[int, Fraction, "ExactReal"]


class DomainError(ValueError):
    """Raised when an exact function is evaluated outside its domain."""


def as_half_integer(x) -> Fraction:
    """Coerce ``x`` to a Fraction and check that ``2x`` is an integer."""
    q = Fraction(x)
    if (2 * q).denominator != 1:
        raise DomainError(f"{x!r} is not a half-integer")
    return q


def _format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


class ExactReal:
    """Sparse sum of rational multiples of half-integer powers of π.

    Instances are immutable and hashable.  The empty sum is zero.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping | None = None):
        clean: dict[Fraction, Fraction] = {}
        if terms:
            for h, c in terms.items():
                h = as_half_integer(h)
                c = Fraction(c)
                if c:
                    clean[h] = clean.get(h, Fraction(0)) + c
                    if not clean[h]:
                        del clean[h]
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "ExactReal":
        # trusted constructor: keys are half-integer Fractions, values nonzero
        obj = object.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def rational(cls, q) -> "ExactReal":
        q = Fraction(q)
        return cls._raw({Fraction(0): q} if q else {})

    @classmethod
    def pi_power(cls, h, coeff=1) -> "ExactReal":
        c = Fraction(coeff)
        return cls._raw({as_half_integer(h): c} if c else {})

    @property
    def terms(self) -> Mapping[Fraction, Fraction]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def is_rational(self) -> bool:
        return not self._terms or set(self._terms) == {Fraction(0)}

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise DomainError(f"{self} is not rational")
        return self._terms.get(Fraction(0), Fraction(0))

    # arithmetic -----------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "ExactReal | None":
        if isinstance(other, ExactReal):
            return other
        if isinstance(other, (int, Rational)):
            return ExactReal.rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self._terms)
        for h, c in o._terms.items():
            v = out.get(h, 0) + c
            if v:
                out[h] = v
            else:
                out.pop(h, None)
        return ExactReal._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return ExactReal._raw({h: -c for h, c in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if len(o._terms) == 1 and len(self._terms) == 1:
            (h1, c1), = self._terms.items()
            (h2, c2), = o._terms.items()
            return ExactReal._raw({h1 + h2: c1 * c2})
        out: dict[Fraction, Fraction] = {}
        for h1, c1 in self._terms.items():
            for h2, c2 in o._terms.items():
                h = h1 + h2
                v = out.get(h, 0) + c1 * c2
                if v:
                    out[h] = v
                else:
                    out.pop(h, None)
        return ExactReal._raw(out)

    __rmul__ = __mul__

    def inverse(self) -> "ExactReal":
        """Multiplicative inverse; only monomials are invertible in this representation."""
        if not self._terms:
            raise ZeroDivisionError("inverse of zero")
        if len(self._terms) != 1:
            raise DomainError(f"cannot invert the non-monomial {self}")
        (h, c), = self._terms.items()
        return ExactReal._raw({-h: 1 / c})

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        if len(self._terms) == 1:
            (h, c), = self._terms.items()
            return ExactReal._raw({h * k: c**k})
        out = ExactReal.rational(1)
        for _ in range(k):
            out = out * self
        return out

    # comparison and conversion --------------------------------------------

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def __float__(self):
        return math.fsum(float(c) * math.pi ** float(h) for h, c in sorted(self._terms.items()))

    def sign(self) -> int:
        """Sign of the real number, decided by a 60-digit evaluation.

        Monomials are decided exactly.  For longer sums a cancellation below the
        working precision would be misreported; the values in this package never
        come close to that.
        """
        if not self._terms:
            return 0
        if len(self._terms) == 1:
            (_, c), = self._terms.items()
            return 1 if c > 0 else -1
        with mpmath.workdps(60):
            total = mpmath.fsum(
                mpmath.mpf(c.numerator) / c.denominator * mpmath.pi ** (mpmath.mpf(h.numerator) / h.denominator)
                for h, c in self._terms.items()
            )
        return (total > 0) - (total < 0)

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __le__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() <= 0

    def __gt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() > 0

    def __ge__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() >= 0

    def __str__(self):
        if not self._terms:
            return "0/1 * pi^(0)"
        parts = []
        for h, c in sorted(self._terms.items()):
            hs = str(h.numerator) if h.denominator == 1 else f"{h.numerator}/{h.denominator}"
            parts.append(f"{_format_fraction(c)} * pi^({hs})")
        return " + ".join(parts)

    def __repr__(self):
        return f"ExactReal({self})"

    def to_json(self) -> dict:
        return {"exact": str(self), "decimal": float(self)}


ZERO = ExactReal()
ONE = ExactReal.rational(1)
SQRT_PI = ExactReal.pi_power(Fraction(1, 2))
PI = ExactReal.pi_power(1)
