"""Exact checks of the Gamma-function and binomial identities behind the coefficients."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .coefficients import (
    CoeffIndex,
    alpha_njk,
    c_kinematic,
    c_kinematic_raw,
    c_nj_s,
    c_special,
    pipeline_coeffs,
)
from .gamma import binom, gamma, gamma_ratio, is_pole, omega, rgamma
from .ring import SQRT_PI, ZERO, DomainError, ExactReal

half = Fraction(1, 2)

SUITES = ("A1", "A2", "legendre", "pipeline")


@dataclass(frozen=True)
class IdentityResult:
    identity: str
    params: tuple
    lhs: object
    rhs: object
    passed: bool

    def to_json(self) -> dict:
        return {
            "identity": self.identity,
            "params": list(self.params),
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "pass": self.passed,
        }


@dataclass
class SuiteReport:
    results: list[IdentityResult] = field(default_factory=list)

    @property
    def failures(self) -> list[IdentityResult]:
        return [r for r in self.results if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def counts(self) -> dict[str, tuple[int, int]]:
        out: dict[str, list[int]] = {}
        for r in self.results:
            c = out.setdefault(r.identity, [0, 0])
            c[0] += r.passed
            c[1] += 1
        return {k: (v[0], v[1]) for k, v in out.items()}


def _check(name, params, lhs, rhs) -> IdentityResult:
    return IdentityResult(name, tuple(params), lhs, rhs, lhs == rhs)


# -- binomial sums of reciprocal Gamma products (suite A1) ---------------------


def a1_sides(q: int, b, c) -> tuple[ExactReal, ExactReal]:
    """Σ_y C(q,y)/(Γ(b+y)Γ(c-y)) and Γ(b+c+q-1)/(Γ(c)Γ(b+q)Γ(b+c-1))."""
    b, c = Fraction(b), Fraction(c)
    lhs = ZERO
    for y in range(q + 1):
        lhs = lhs + binom(q, y) * rgamma(b + y) * rgamma(c - y)
    rhs = gamma_ratio(b + c + q - 1, b + c - 1) * rgamma(c) * rgamma(b + q)
    return lhs, rhs


def a1_literal_rhs(q: int, b, c) -> ExactReal | None:
    """The right side read literally with 1/Γ = 0 at poles; None if Γ itself hits a pole."""
    top = Fraction(b) + Fraction(c) + q - 1
    if is_pole(top):
        return None
    return gamma(top) * rgamma(c) * rgamma(Fraction(b) + q) * rgamma(Fraction(b) + Fraction(c) - 1)


def alt_sides(q: int, a, b) -> tuple[ExactReal, ExactReal]:
    """Σ_y (-1)^y C(q,y) Γ(a+y)/Γ(b+y) and Γ(a)Γ(b-a+q)/(Γ(b+q)Γ(b-a)), for a > 0."""
    a, b = Fraction(a), Fraction(b)
    if a <= 0:
        raise DomainError("the alternating sum needs a > 0")
    lhs = ZERO
    for y in range(q + 1):
        lhs = lhs + (-1) ** y * binom(q, y) * gamma(a + y) * rgamma(b + y)
    rhs = gamma(a) * gamma_ratio(b - a + q, b - a) * rgamma(b + q)
    return lhs, rhs


def suite_a1(max_q: int = 12, lo2: int = -5, hi2: int = 12) -> Iterator[IdentityResult]:
    halves = [Fraction(t, 2) for t in range(lo2, hi2 + 1)]
    for q in range(max_q + 1):
        for b in halves:
            for c in halves:
                lhs, rhs = a1_sides(q, b, c)
                yield _check("A1", (q, str(b), str(c)), lhs, rhs)
                lit = a1_literal_rhs(q, b, c)
                if lit is not None:
                    yield _check("A1-literal", (q, str(b), str(c)), lhs, lit)
            for a in halves:
                if a <= 0:
                    continue
                lhs, rhs = alt_sides(q, a, b)
                yield _check("A1-alternating", (q, str(a), str(b)), lhs, rhs)


# -- polynomial Gamma-ratio identity and the Vandermonde step (suite A2) ------


Poly = dict  # degree -> Fraction


def _pmul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for d1, c1 in p.items():
        for d2, c2 in q.items():
            out[d1 + d2] = out.get(d1 + d2, 0) + c1 * c2
    return {d: c for d, c in out.items() if c}


def _padd(p: Poly, q: Poly, scale=1) -> Poly:
    out = dict(p)
    for d, c in q.items():
        out[d] = out.get(d, 0) + scale * c
    return {d: c for d, c in out.items() if c}


def _ppow(p: Poly, k: int) -> Poly:
    out: Poly = {0: Fraction(1)}
    for _ in range(k):
        out = _pmul(out, p)
    return out


_ONE_MINUS_Z2 = {0: Fraction(1), 2: Fraction(-1)}


def a2_sides(x: int, alpha: int, s: int) -> tuple[Poly, Poly]:
    lhs: Poly = {}
    for i in range(2 * x + alpha, s + 1):
        coef = (-1) ** (i + alpha) * binom(s, i) * binom(i, 2 * x) * binom(i - 2 * x, alpha)
        lhs = _padd(lhs, _ppow(_ONE_MINUS_Z2, i), coef)
    coef = binom(s, 2 * x) * binom(s - 2 * x, alpha)
    rhs = _pmul({2 * s - 4 * x - 2 * alpha: Fraction(coef)}, _ppow(_ONE_MINUS_Z2, 2 * x + alpha))
    rhs = {d: c for d, c in rhs.items() if c}
    return lhs, rhs


def format_poly(p: Poly, var: str = "z") -> str:
    if not p:
        return "0"
    return " + ".join(f"{c}*{var}^{d}" for d, c in sorted(p.items()))


def suite_a2(max_s: int = 8) -> Iterator[IdentityResult]:
    for s in range(max_s + 1):
        for x in range(s // 2 + 1):
            for alpha in range(s - 2 * x + 1):
                lhs, rhs = a2_sides(x, alpha, s)
                yield IdentityResult("A2", (x, alpha, s), format_poly(lhs), format_poly(rhs), lhs == rhs)
        # Vandermonde convolution in the form used when collapsing the α sum
        for x in range(s // 2 + 1):
            for be in range(s // 2 + 1):
                for ga in range(s + 2 * be + 1):
                    lhs = sum(binom(s - 2 * x, a) * binom(2 * be, ga - a)
                              for a in range(max(ga - 2 * be, 0), min(s - 2 * x, ga) + 1))
                    rhs = binom(s - 2 * x + 2 * be, ga)
                    yield IdentityResult("Vandermonde", (s, x, be, ga), lhs, rhs, lhs == rhs)


# -- Legendre duplication -----------------------------------------------------


def suite_legendre(max_2c: int = 24) -> Iterator[IdentityResult]:
    for t in range(1, max_2c + 1):
        c = Fraction(t, 2)
        lhs = gamma(c) * gamma(c + half)
        rhs = ExactReal.rational(Fraction(2) ** (1 - t)) * SQRT_PI * gamma(2 * c)
        yield _check("Legendre", (str(c),), lhs, rhs)


# -- coefficient pipeline -----------------------------------------------------


def admissible(n: int, j: int, k: int, s: int, l: int) -> Iterator[tuple[int, int]]:
    for m in range(s // 2 + 1):
        for i in range(m + 1):
            yield i, m


def suite_pipeline(max_n: int = 6, max_s: int = 6, max_l: int = 4) -> Iterator[IdentityResult]:
    for n in range(2, max_n + 1):
        for j in range(0, n + 1):
            for k in range(j, n + 1):
                for s in range(max_s + 1):
                    for l in range(max_l + 1):
                        if j == 0 and l:
                            continue
                        if j == n and s:
                            continue
                        yield from _pipeline_cell(n, j, k, s, l)
        for j in range(1, n):
            for k in range(j, n + 1):
                de = _d_times_e(n, j, k)
                if de is not None:
                    yield de
        for j in range(0, n):
            for s in range(max_s + 1):
                for l in range(max_l + 1):
                    if j == 0 and l:
                        continue
                    yield _plusplus(n, j, s, l)


def _d_times_e(n, j, k):
    from math import factorial

    from .coefficients import d_coeff, e_coeff

    if k == n:
        return None
    lhs = d_coeff(n, j, k) * e_coeff(n - j, n - k, k - j, j + 2)
    rhs = ExactReal.rational(Fraction(factorial(n - k + j) * factorial(k), factorial(n) * factorial(j)))
    return _check("d*e", (n, j, k), lhs, rhs)


def _pipeline_cell(n, j, k, s, l) -> Iterator[IdentityResult]:
    for i, m in admissible(n, j, k, s, l):
        idx = CoeffIndex(n, j, k, s, l, i, m)
        c = c_kinematic(idx)
        if s == 0:
            yield _check("s0-alpha", (n, j, k, l), c, alpha_njk(n, j, k))
        if l in (0, 1):
            ok = c.sign() >= 0
            yield IdentityResult("nonnegative", (n, j, k, s, l, i, m), c, ZERO, ok)
            if k < n:
                spec = c_special(idx, "l0" if l == 0 else "l1")
                yield _check("special", (n, j, k, s, l, i, m), spec, c)
        if 0 < j < k < n:
            p = pipeline_coeffs(n, j, k, s, l, i, m)
            norm = gamma(i + half) * binom(s, 2 * i)
            yield _check("a-hat", (n, j, k, s, i, m), p.a_hat_raw, norm * p.a_closed)
            yield _check("assembled", (n, j, k, s, l, i, m), p.c_assembled, c)


def _plusplus(n, j, s, l) -> IdentityResult:
    """Merging the k = n terms of the general closed form gives c_{n,j}^s."""
    total = ZERO
    if s % 2 == 0:
        m = s // 2
        for i in range(m + 1):
            raw = c_kinematic_raw(CoeffIndex(n, j, n, s, l, i, m))
            total = total + raw * omega(n + 2 * l + 2 * i) / omega(n + s + 2 * l)
    return _check("k=n merge", (n, j, s, l), total, c_nj_s(n, j, s))


def identity_suite(suite: str = "all", max_q: int = 12, max_s_a2: int = 8,
                   max_2c: int = 24, max_n: int = 6, max_s: int = 6,
                   max_l: int = 4) -> SuiteReport:
    """Run the requested identity families and collect every check."""
    chosen = SUITES if suite == "all" else (suite,)
    unknown = set(chosen) - set(SUITES)
    if unknown:
        raise DomainError(f"unknown suite {sorted(unknown)}")
    report = SuiteReport()
    for name in chosen:
        if name == "A1":
            gen: Iterable = suite_a1(max_q)
        elif name == "A2":
            gen = suite_a2(max_s_a2)
        elif name == "legendre":
            gen = suite_legendre(max_2c)
        else:
            gen = suite_pipeline(max_n, max_s, max_l)
        report.results.extend(gen)
    return report
