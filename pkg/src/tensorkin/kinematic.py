"""Right-hand sides of the kinematic formula for tensorial curvature measures.

Every term has the shape  c · Q^{m-i} φ_k^{r,s-2m,l+i}(P, β) · φ_{n-k+j}(P', β').
Coefficients are evaluated exactly and converted to float once per term; terms
are accumulated in fixed (k, m, i) order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import exactnum as ex
from .measures import MeasureError, MeasureSpec, intrinsic_volumes, local_minkowski_tensor
from .polytope import Polytope, RegionSpec
from .symtensor import SymTensor, metric_q, sym_mul, sym_pow

VARIANTS = ("main", "l0", "l1")


@dataclass(frozen=True, eq=False)
class KinematicQuery:
    P: Polytope
    Pp: Polytope
    j: int
    r: int = 0
    s: int = 0
    l: int = 0
    beta: RegionSpec = field(default_factory=RegionSpec.all)
    betap: RegionSpec = field(default_factory=RegionSpec.all)

    def __post_init__(self):
        if self.P.n != self.Pp.n:
            raise MeasureError("P and P' live in different dimensions")
        if min(self.j, self.r, self.s, self.l) < 0 or self.j > self.n:
            raise MeasureError(f"invalid indices j={self.j} r={self.r} s={self.s} l={self.l}")
        if self.j == self.n and self.s != 0:
            raise MeasureError("the top-degree measure needs s = 0")
        if self.j == 0 and self.l != 0:
            raise MeasureError("l must vanish for j = 0")

    @property
    def n(self) -> int:
        return self.P.n

    @property
    def rank(self) -> int:
        return self.r + self.s + 2 * self.l

    def spec(self) -> MeasureSpec:
        return MeasureSpec(self.j, self.r, self.s, self.l, self.beta)

    def to_json(self) -> dict:
        return {
            "P": self.P.to_json(), "Pp": self.Pp.to_json(),
            "j": self.j, "r": self.r, "s": self.s, "l": self.l,
            "beta": self.beta.to_json(), "betap": self.betap.to_json(),
        }


@dataclass(frozen=True, eq=False)
class RhsTerm:
    k: int
    m: int
    i: int | None  # None marks the merged k = n term
    coeff: ex.ExactReal
    tensor: SymTensor

    def to_json(self) -> dict:
        return {"k": self.k, "m": self.m, "i": self.i, "coeff": str(self.coeff),
                "coeff_decimal": float(self.coeff), "tensor": self.tensor.to_json()}


@dataclass(frozen=True, eq=False)
class RhsResult:
    tensor: SymTensor
    terms: tuple[RhsTerm, ...]

    def to_json(self) -> dict:
        return {"tensor": self.tensor.to_json(), "terms": [t.to_json() for t in self.terms]}


class _MeasureCache:
    """Memoizes φ values of the two bodies; a query touches each at most once."""

    def __init__(self, q: KinematicQuery, r_fixed: int, r_moving: int):
        self.q = q
        self.r_fixed = r_fixed
        self.r_moving = r_moving
        self._fixed: dict[tuple, SymTensor] = {}
        self._moving: dict[int, float | SymTensor] = {}

    def fixed(self, k: int, s: int, l: int) -> SymTensor:
        key = (k, s, l)
        if key not in self._fixed:
            self._fixed[key] = local_minkowski_tensor(
                self.q.P, MeasureSpec(k, self.r_fixed, s, l, self.q.beta))
        return self._fixed[key]

    def moving(self, j: int) -> SymTensor:
        if j not in self._moving:
            self._moving[j] = local_minkowski_tensor(
                self.q.Pp, MeasureSpec(j, self.r_moving, 0, 0, self.q.betap))
        return self._moving[j]


def _assemble(q: KinematicQuery, cache: _MeasureCache, coeff_fn, merged_top: bool) -> RhsResult:
    n, j, s, l = q.n, q.j, q.s, q.l
    rank = cache.r_fixed + cache.r_moving + s + 2 * l
    Q = metric_q(n)
    total = SymTensor.zero(n, rank)
    terms: list[RhsTerm] = []
    for k in range(j, n + 1):
        if k == n and k > j and merged_top:
            if s % 2:
                continue
            c = ex.c_nj_s(n, j, s)
            t = sym_mul(cache.fixed(n, 0, s // 2 + l), cache.moving(j)) * float(c)
            terms.append(RhsTerm(n, s // 2, None, c, t))
            total = total + t
            continue
        for m in range(s // 2 + 1):
            if k == n and s - 2 * m != 0:
                continue  # φ_n vanishes for positive s
            for i in range(m + 1):
                c = coeff_fn(ex.CoeffIndex(n, j, k, s, l, i, m))
                if c.is_zero():
                    continue
                if k == 0 and l + i > 0:
                    continue  # φ_0 with positive l vanishes
                phi = cache.fixed(k, s - 2 * m, l + i)
                t = sym_mul(sym_mul(sym_pow(Q, m - i), phi), cache.moving(n - k + j)) * float(c)
                terms.append(RhsTerm(k, m, i, c, t))
                total = total + t
    return RhsResult(total, tuple(terms))


def rhs_theorem_main_terms(q: KinematicQuery) -> RhsResult:
    """Full right-hand side with its per-(k, m, i) breakdown."""
    return _assemble(q, _MeasureCache(q, q.r, 0), ex.c_kinematic, merged_top=True)


def rhs_theorem_main(q: KinematicQuery) -> SymTensor:
    return rhs_theorem_main_terms(q).tensor


def rhs_special_terms(q: KinematicQuery, variant: str) -> RhsResult:
    """Right-hand side from the l = 0 or l = 1 specialized coefficients.

    The k = n column is summed term by term with the unmerged coefficients,
    so this path does not reuse the merged constant of the general formula.
    """
    if variant == "main":
        return rhs_theorem_main_terms(q)
    if variant not in ("l0", "l1"):
        raise MeasureError(f"unknown variant {variant!r}")
    want_l = 0 if variant == "l0" else 1
    if q.l != want_l:
        raise MeasureError(f"variant {variant} needs l = {want_l}, got l = {q.l}")
    if variant == "l1" and q.j < 1:
        raise MeasureError("variant l1 needs j >= 1")
    return _assemble(q, _MeasureCache(q, q.r, 0), lambda idx: ex.c_special(idx, variant),
                     merged_top=False)


def rhs_special(q: KinematicQuery, variant: str) -> SymTensor:
    return rhs_special_terms(q, variant).tensor


def rhs_weighted_terms(q: KinematicQuery, r_hat: int, r_bar: int) -> RhsResult:
    """Right-hand side with weights f(x) = x^{r̂}/r̂! on P and h(y) = y^{r̄}/r̄! on P'.

    The factorials match the normalization of c_{n,j}^{r,0,0} = 1/r!, so the
    two factors are again φ-values: φ_k^{r̂,·,·}(P,β) and φ^{r̄,0,0}(P',β').
    """
    if q.r != 0:
        raise MeasureError("weighted queries carry the position powers in r̂, r̄; set r = 0")
    if r_hat < 0 or r_bar < 0:
        raise MeasureError("weight exponents must be nonnegative")
    return _assemble(q, _MeasureCache(q, r_hat, r_bar), ex.c_kinematic, merged_top=True)


def rhs_weighted(q: KinematicQuery, r_hat: int, r_bar: int) -> SymTensor:
    return rhs_weighted_terms(q, r_hat, r_bar).tensor


# -- coefficient consistency -----------------------------------------------------


@dataclass
class ConsistencyReport:
    checks: dict[str, int]
    failures: list[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"pass": self.passed, "checks": self.checks, "failures": self.failures[:50]}


def coefficient_consistency_report(max_n: int = 6, max_s: int = 6, max_l: int = 4) -> ConsistencyReport:
    """Exact cross-checks of the kinematic coefficients over a finite range."""
    checks = {"assembled": 0, "s0-alpha": 0, "nonnegative": 0, "k=j": 0, "k=n merge": 0}
    failures: list[str] = []

    def record(tag, label: str, ok: bool):
        checks[label] += 1
        if not ok:
            failures.append(f"{label}: {tag}")

    for n in range(2, max_n + 1):
        for j in range(n + 1):
            for k in range(j, n + 1):
                for s in range(max_s + 1):
                    for l in range(max_l + 1 if j else 1):
                        for m in range(s // 2 + 1):
                            for i in range(m + 1):
                                idx = ex.CoeffIndex(n, j, k, s, l, i, m)
                                c = ex.c_kinematic(idx)
                                if 0 < j < k < n:
                                    pc = ex.pipeline_coeffs(n, j, k, s, l, i, m)
                                    record(idx, "assembled", pc.c_assembled == c)
                                if s == 0:
                                    record(idx, "s0-alpha", c == ex.alpha_njk(n, j, k))
                                if l <= 1:
                                    record(idx, "nonnegative", c.sign() >= 0)
                                if k == j:
                                    record(idx, "k=j", c == (ex.ONE if i == m == 0 else ex.ZERO))
                if k == n and j < n:
                    for s2 in range(0, max_s + 1, 2):
                        for l2 in range(max_l + 1 if j else 1):
                            total = ex.ZERO
                            for i in range(s2 // 2 + 1):
                                raw = ex.c_kinematic_raw(ex.CoeffIndex(n, j, n, s2, l2, i, s2 // 2))
                                total = total + raw * ex.omega(n + 2 * l2 + 2 * i) / ex.omega(n + s2 + 2 * l2)
                            record((n, j, s2, l2), "k=n merge", total == ex.c_nj_s(n, j, s2))
    return ConsistencyReport(checks, failures)


def scalar_principal_value(P: Polytope, Pp: Polytope, j: int = 0) -> float:
    """Σ_k α_{njk} V_k(P) V_{n-k+j}(P'), the classical principal kinematic value."""
    vp, vq = intrinsic_volumes(P), intrinsic_volumes(Pp)
    n = P.n
    return math.fsum(float(ex.alpha_njk(n, j, k)) * vp[k] * vq[n - k + j] for k in range(j, n + 1))
