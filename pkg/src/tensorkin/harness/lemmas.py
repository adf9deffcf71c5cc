"""Monte Carlo checks of the Grassmannian, rotation and sphere integral formulas.

Each verifier samples the integrand of one formula, evaluates the tensor it
produces at the probe points of :func:`probe_basis`, and compares the mean
coefficient vector against the closed form evaluated in ExactReal.

Identifiers: L41 (Grassmannian decomposition with the [F,L]^j factor), L42
(slicing by a direction u), L43 (sphere moments), L44 (moments of Q(L)),
L45 (moments of [F,L]^a Q(L)^i), L46 (mixed moments of Q(L), Q(L^⊥)), L47
(rotation average of Q(ϑL)^l (ϑu)^s), L48 (rotation average of
(ρv)^i ⟨u,ρv⟩^t), P49 ([F,L]^2 Q(L)^m Q(F∩L)^l) and L410 (subspaces through U).
"""

from __future__ import annotations

import math
import time
from fractions import Fraction
from typing import Callable

import numpy as np

from .. import exactnum as ex
from ..subspaces import (
    RngStream,
    Subspace,
    complement,
    grassmannian_bases,
    haar_rotations,
    relative_grassmannian_bases,
    sphere_points,
    subspace_determinants,
)
from ..symtensor import SymTensor, metric_q, power_of_vector, probe_basis, q_of_subspace, sym_mul, sym_pow
from .report import Z_GATE, RunningMoments, VerificationReport, z_scores

LEMMA_IDS = ("L41", "L42", "L43", "L44", "L45", "L46", "L47", "L48", "L410", "P49")
FIXTURE_SEED = 0x5EED_F1C5
DEFAULT_LEMMA_SAMPLES = 1_000_000
CHUNK = 100_000

DEFAULT_CASES: dict[str, list[dict]] = {
    "L41": [dict(n=3, j=1, k=2, i=1), dict(n=4, j=2, k=3, i=1), dict(n=3, j=0, k=1, i=1)],
    "L42": [dict(n=3, k=1, i=1), dict(n=4, k=2, i=2), dict(n=3, k=2, i=1)],
    "L43": [dict(n=2, s=2), dict(n=3, s=4), dict(n=3, s=3)],
    "L44": [dict(n=2, k=1, i=1), dict(n=3, k=2, i=2), dict(n=3, k=0, i=1)],
    "L45": [dict(n=3, k=2, r=2, a=2, i=1), dict(n=3, k=1, r=2, a=1, i=2), dict(n=3, k=2, r=1, a=2, i=1)],
    "L46": [dict(n=3, k=1, i=1, j=1), dict(n=4, k=2, i=1, j=2), dict(n=3, k=3, i=1, j=1)],
    "L47": [dict(n=3, j=1, l=1, s=2), dict(n=2, j=1, l=1, s=1), dict(n=3, j=0, l=0, s=2)],
    "L48": [dict(n=3, i=2, t=2), dict(n=2, i=3, t=1), dict(n=3, i=2, t=0)],
    "P49": [dict(n=3, k=2, j=1, m=1, l=1), dict(n=4, k=3, j=1, m=1, l=0), dict(n=3, k=2, j=2, m=1, l=1)],
    "L410": [dict(n=3, j=1, k=1, i=2), dict(n=4, j=1, k=2, i=1), dict(n=3, j=1, k=2, i=1)],
}


class LemmaError(ValueError):
    """Parameters outside a formula's hypotheses."""


def _h(v) -> Fraction:
    return Fraction(v, 2)


def _ratio(a, b) -> ex.ExactReal:
    return ex.gamma_ratio(a, b)


def _product(*factors: Callable[[], ex.ExactReal]) -> ex.ExactReal:
    """Multiply lazily and stop at the first zero, so later poles are never touched."""
    out = ex.ONE
    for f in factors:
        v = f()
        if v.is_zero():
            return ex.ZERO
        out = out * v
    return out


# -- fixtures -------------------------------------------------------------------


def fixture_frame(lemma: str, n: int) -> np.ndarray:
    """A fixed generic orthonormal frame of R^n (rows), independent of the run seed."""
    return haar_rotations(RngStream(FIXTURE_SEED, f"fixture/{lemma}/{n}"), n, 1)[0].T


# -- probe helpers ----------------------------------------------------------------


def _q_at(B: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Q(L)(X) for stacked bases B (N,k,n) at probes X (M,n) → (N,M)."""
    if B.shape[1] == 0:
        return np.zeros((B.shape[0], X.shape[0]))
    P = np.einsum("nkd,md->nkm", B, X)
    return np.einsum("nkm,nkm->nm", P, P)


def _lin_at(U: np.ndarray, X: np.ndarray) -> np.ndarray:
    return U @ X.T


def _orthonormal_extension(fixed: np.ndarray, extra: int, rng: RngStream) -> np.ndarray:
    """Haar-random ``extra``-dimensional subspaces orthogonal to the stacked bases ``fixed``."""
    N, f, n = fixed.shape
    G = rng.normal((N, extra, n))
    if f:
        G = G - np.einsum("nek,nkd->ned", np.einsum("ned,nkd->nek", G, fixed), fixed)
    Qm, R = np.linalg.qr(np.swapaxes(G, 1, 2))
    return np.swapaxes(Qm, 1, 2)


# -- lemma definitions ------------------------------------------------------------


class _Lemma:
    """Sampler returning probe values (N, M) plus the exact tensor."""

    rank: int
    n: int

    def exact(self) -> SymTensor:
        raise NotImplementedError

    def sample(self, rng: RngStream, N: int, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _grassmann_moment(n: int, k: int, i: int) -> ex.ExactReal:
    return _product(lambda: _ratio(_h(k) + i, _h(k)), lambda: _ratio(_h(n), _h(n) + i))


class L41(_Lemma):
    def __init__(self, n, j, k, i):
        if not 0 <= j <= k <= n:
            raise LemmaError("need 0 <= j <= k <= n")
        self.n, self.j, self.k, self.i = n, j, k, i
        self.rank = 2 * i
        self.F = Subspace(n, fixture_frame("L41", n)[:k])
        self.d = float(ex.d_coeff(n, j, k))

    def exact(self):
        n, k, j, i = self.n, self.k, self.j, self.i
        return sym_pow(metric_q(n), i) * float(_grassmann_moment(n, n - k + j, i))

    def sample(self, rng, N, X):
        U = relative_grassmannian_bases(rng.substream("U"), self.F, self.j, N)
        extra = _orthonormal_extension(U, self.n - self.k, rng.substream("L"))
        L = np.concatenate([U, extra], axis=1)
        Fb = np.broadcast_to(self.F.basis, (N, self.k, self.n))
        det = subspace_determinants(Fb, L) ** self.j
        return (self.d * det)[:, None] * _q_at(L, X) ** self.i

    def second(self, rng, N, X):
        """Left side: Q(L)^i with L drawn directly from G(n, n-k+j)."""
        return _q_at(grassmannian_bases(rng, self.n, self.n - self.k + self.j, N), X) ** self.i


class L42(_Lemma):
    def __init__(self, n, k, i):
        if not 0 < k < n:
            raise LemmaError("need 0 < k < n")
        self.n, self.k, self.i = n, k, i
        self.rank = 2 * i
        frame = fixture_frame("L42", n)
        self.u = frame[0]
        self.u_perp = Subspace(n, frame[1:])
        beta = math.exp(math.lgamma(k / 2) + math.lgamma(0.5) - math.lgamma(k / 2 + 0.5))
        self.weight = (float(ex.omega(k)) / (2 * float(ex.omega(n))) * float(ex.omega(n - k)) * beta)

    def exact(self):
        return sym_pow(metric_q(self.n), self.i) * float(_grassmann_moment(self.n, self.k, self.i))

    def sample(self, rng, N, X):
        n, k = self.n, self.k
        U = relative_grassmannian_bases(rng.substream("U"), self.u_perp, k - 1, N)
        # |t| has density ∝ |t|^{k-1} (1-t²)^{-1/2}; the rest of the kernel is a bounded weight
        t = np.sqrt(rng.substream("t").beta(k / 2, 0.5, N))
        t = t * np.where(rng.substream("sign").uniform(size=N) < 0.5, -1.0, 1.0)
        fixed = np.concatenate([U, np.broadcast_to(self.u, (N, 1, n))], axis=1)
        w = _orthonormal_extension(fixed, 1, rng.substream("w"))[:, 0, :]
        s = np.sqrt(np.maximum(1.0 - t * t, 0.0))
        d = t[:, None] * self.u + s[:, None] * w
        L = np.concatenate([U, d[:, None, :]], axis=1)
        wt = self.weight * s ** (n - k - 1)
        return wt[:, None] * _q_at(L, X) ** self.i


class L43(_Lemma):
    def __init__(self, n, s):
        self.n, self.s = n, s
        self.rank = s

    def exact(self):
        n, s = self.n, self.s
        if s % 2:
            return SymTensor.zero(n, s)
        c = 2 * ex.omega(n + s) / ex.omega(s + 1)
        return sym_pow(metric_q(n), s // 2) * float(c)

    def sample(self, rng, N, X):
        U = sphere_points(rng, self.n, N)
        return float(ex.omega(self.n)) * _lin_at(U, X) ** self.s


class L44(_Lemma):
    def __init__(self, n, k, i):
        if not 0 <= k <= n:
            raise LemmaError("need 0 <= k <= n")
        self.n, self.k, self.i = n, k, i
        self.rank = 2 * i

    def exact(self):
        return sym_pow(metric_q(self.n), self.i) * float(_grassmann_moment(self.n, self.k, self.i))

    def sample(self, rng, N, X):
        return _q_at(grassmannian_bases(rng, self.n, self.k, N), X) ** self.i


def l45_exact(n, k, r, a, i, F: Subspace) -> SymTensor:
    """Closed form of ∫ [F,L]^a Q(L)^i over G(n,k) for F of dimension r."""
    if k + r < n:
        raise LemmaError("need k + r >= n")
    e = ex.e_coeff(n, k, r, a)
    Q, QF = metric_q(n), q_of_subspace(F.basis, n)
    out = SymTensor.zero(n, 2 * i)
    for b in range(i + 1):
        c = _product(
            lambda: e,
            lambda: _ratio(_h(n + a), _h(n + a) + i),
            lambda: _ratio(_h(k + a) + i - b, _h(k + a)),
            lambda: ex.ExactReal.rational((-1) ** b * math.comb(i, b)),
            lambda: _ratio(_h(n - k) + b, _h(n - k)),
            lambda: _ratio(_h(a) + 1, _h(a) + 1 - b),
            lambda: _ratio(_h(r), _h(r) + b),
        )
        if not c.is_zero():
            out = out + sym_mul(sym_pow(Q, i - b), sym_pow(QF, b)) * float(c)
    return out


class L45(_Lemma):
    def __init__(self, n, k, r, a, i):
        if not (0 <= k <= n and 0 <= r <= n and k + r >= n):
            raise LemmaError("need k, r in [0, n] and k + r >= n")
        self.n, self.k, self.r, self.a, self.i = n, k, r, a, i
        self.rank = 2 * i
        self.F = Subspace(n, fixture_frame("L45", n)[:r])

    def exact(self):
        return l45_exact(self.n, self.k, self.r, self.a, self.i, self.F)

    def sample(self, rng, N, X):
        L = grassmannian_bases(rng, self.n, self.k, N)
        Fb = np.broadcast_to(self.F.basis, (N, self.r, self.n))
        det = subspace_determinants(Fb, L) ** self.a
        return det[:, None] * _q_at(L, X) ** self.i


class L46(_Lemma):
    def __init__(self, n, k, i, j):
        if not 0 <= k <= n:
            raise LemmaError("need 0 <= k <= n")
        self.n, self.k, self.i, self.j = n, k, i, j
        self.rank = 2 * (i + j)

    def exact(self):
        n, k, i, j = self.n, self.k, self.i, self.j
        c = _product(lambda: _ratio(_h(k) + i, _h(k)), lambda: _ratio(_h(n - k) + j, _h(n - k)),
                     lambda: _ratio(_h(n), _h(n) + i + j))
        return sym_pow(metric_q(n), i + j) * float(c)

    def sample(self, rng, N, X):
        qL = _q_at(grassmannian_bases(rng, self.n, self.k, N), X)
        qX = np.einsum("md,md->m", X, X)[None, :]
        return qL ** self.i * (qX - qL) ** self.j


class L47(_Lemma):
    def __init__(self, n, j, l, s):
        if not 0 <= j < n:
            raise LemmaError("need 0 <= j < n")
        self.n, self.j, self.l, self.s = n, j, l, s
        self.rank = 2 * l + s
        frame = fixture_frame("L47", n)
        self.L = frame[:j]
        self.u = frame[j]

    def exact(self):
        n, j, l, s = self.n, self.j, self.l, self.s
        if s % 2:
            return SymTensor.zero(n, self.rank)
        c = _product(lambda: _ratio(_h(j) + l, _h(j)), lambda: _ratio(_h(n), _h(n + s) + l),
                     lambda: ex.gamma(_h(s + 1)) / ex.SQRT_PI)
        return sym_pow(metric_q(n), l + s // 2) * float(c)

    def sample(self, rng, N, X):
        R = haar_rotations(rng, self.n, N)
        L = np.einsum("nab,kb->nka", R, self.L)
        u = np.einsum("nab,b->na", R, self.u)
        return _q_at(L, X) ** self.l * _lin_at(u, X) ** self.s


class L48(_Lemma):
    def __init__(self, n, i, t):
        self.n, self.i, self.t = n, i, t
        self.rank = i
        frame = fixture_frame("L48", n)
        self.u = frame[0]
        self.v = (frame[0] + 2.0 * frame[1]) / math.sqrt(5.0)

    def exact(self):
        n, i, t = self.n, self.i, self.t
        if (i + t) % 2:
            return SymTensor.zero(n, i)
        pre = ex.gamma(_h(n)) * ex.gamma(t + 1) / (
            ex.ExactReal.rational(2**t) * ex.SQRT_PI * ex.gamma(_h(n + i + t)))
        out = SymTensor.zero(n, i)
        for x in range(max(0, (i - t) // 2), i // 2 + 1):
            c = pre * ex.ExactReal.rational(math.comb(i, 2 * x)) * ex.gamma(Fraction(2 * x + 1, 2)) \
                / ex.gamma(_h(t - i) + x + 1)
            out = out + sym_mul(power_of_vector(self.u, i - 2 * x), sym_pow(metric_q(n), x)) * float(c)
        return out

    def sample(self, rng, N, X):
        w = np.einsum("nab,b->na", haar_rotations(rng, self.n, N), self.v)
        return _lin_at(w, X) ** self.i * (w @ self.u)[:, None] ** self.t


def p49_exact(n, k, j, m, l, F: Subspace) -> SymTensor:
    """Closed form of ∫ [F,L]^2 Q(L)^m Q(F∩L)^l over G(n, n-k+j)."""
    Q, QF = metric_q(n), q_of_subspace(F.basis, n)
    pre = ex.ExactReal.rational(Fraction(math.factorial(n - k + j) * math.factorial(k),
                                         math.factorial(n) * math.factorial(j)))
    out = SymTensor.zero(n, 2 * (m + l))
    for i in range(m + 1):
        c = _product(
            lambda: pre,
            lambda: _ratio(_h(k - j) + i, _h(k - j)),
            lambda: _ratio(_h(j) + l, _h(j)),
            lambda: ex.ExactReal.rational(math.comb(m, i) * ex.rising_ratio_l(i, l)),
            lambda: _ratio(_h(n) + 1, _h(n) + m + 1),
            lambda: _ratio(_h(n - k + j) + m - i + 1, _h(n - k + j) + 1),
            lambda: _ratio(_h(k), _h(k) + l + i),
        )
        if not c.is_zero():
            out = out + sym_mul(sym_pow(Q, m - i), sym_pow(QF, l + i)) * float(c)
    return out


class P49(_Lemma):
    def __init__(self, n, k, j, m, l):
        if not (0 <= j <= k <= n and k >= 1):
            raise LemmaError("need 0 <= j <= k <= n and k >= 1")
        self.n, self.k, self.j, self.m, self.l = n, k, j, m, l
        self.rank = 2 * (m + l)
        self.F = Subspace(n, fixture_frame("P49", n)[:k])

    def exact(self):
        return p49_exact(self.n, self.k, self.j, self.m, self.l, self.F)

    def sample(self, rng, N, X):
        n, k, j = self.n, self.k, self.j
        L = grassmannian_bases(rng, n, n - k + j, N)
        Fb = np.broadcast_to(self.F.basis, (N, k, n))
        det2 = subspace_determinants(Fb, L) ** 2
        # F ∩ L is spanned by the principal vectors of the j unit cosines
        Uf, _, _ = np.linalg.svd(np.einsum("kd,nld->nkl", self.F.basis, L))
        FL = np.einsum("nkj,kd->njd", Uf[:, :, :j], self.F.basis)
        return det2[:, None] * _q_at(L, X) ** self.m * _q_at(FL, X) ** self.l


class L410(_Lemma):
    """∫ Q(U+L)^i over L ∈ G(U^⊥, k), sampled directly and as U + ρL0 with ρ Haar on U^⊥."""

    def __init__(self, n, j, k, i):
        if not (j + k <= n and j >= 0 and k >= 0):
            raise LemmaError("need j + k <= n")
        self.n, self.j, self.k, self.i = n, j, k, i
        self.rank = 2 * i
        frame = fixture_frame("L410", n)
        self.U = Subspace(n, frame[:j])
        self.Uperp = complement(self.U)
        self.L0 = np.eye(n - j)[:k]  # fixed k-subspace of U^⊥ in U^⊥ coordinates

    def exact(self):
        n, j, k, i = self.n, self.j, self.k, self.i
        QU = q_of_subspace(self.U.basis, n)
        QUp = q_of_subspace(self.Uperp.basis, n)
        out = SymTensor.zero(n, 2 * i)
        for a in range(i + 1):
            c = _product(lambda: ex.ExactReal.rational(math.comb(i, a)),
                         lambda: _ratio(_h(k) + a, _h(k)),
                         lambda: _ratio(_h(n - j), _h(n - j) + a))
            if not c.is_zero():
                out = out + sym_mul(sym_pow(QU, i - a), sym_pow(QUp, a)) * float(c)
        return out

    def _through_u(self, L: np.ndarray) -> np.ndarray:
        N = L.shape[0]
        return np.concatenate([np.broadcast_to(self.U.basis, (N, self.j, self.n)), L], axis=1)

    def sample(self, rng, N, X):
        L = relative_grassmannian_bases(rng, self.Uperp, self.k, N)
        return _q_at(self._through_u(L), X) ** self.i

    def second(self, rng, N, X):
        rho = haar_rotations(rng, self.n - self.j, N)
        coords = np.einsum("nab,kb->nka", rho, self.L0)
        return _q_at(self._through_u(coords @ self.Uperp.basis), X) ** self.i


LEMMAS = {"L41": L41, "L42": L42, "L43": L43, "L44": L44, "L45": L45, "L46": L46,
          "L47": L47, "L48": L48, "P49": P49, "L410": L410}


def make_lemma(lemma_id: str, params: dict) -> _Lemma:
    if lemma_id not in LEMMAS:
        raise LemmaError(f"unknown lemma {lemma_id!r}; choose from {', '.join(LEMMA_IDS)}")
    if params.get("n", 2) < 2:
        raise LemmaError("the verifiers need n >= 2")
    try:
        return LEMMAS[lemma_id](**params)
    except TypeError as err:
        raise LemmaError(f"bad parameters for {lemma_id}: {err}") from None
    except ex.DomainError as err:
        raise LemmaError(str(err)) from None


def _moments(sampler, rng_label: str, seed: int, samples: int, X, W) -> RunningMoments:
    total = RunningMoments(len(X))
    for b, start in enumerate(range(0, samples, CHUNK)):
        size = min(CHUNK, samples - start)
        vals = sampler(RngStream(seed, f"{rng_label}/{b}"), size, X)
        total = total.merge(RunningMoments.from_samples(vals @ W.T))
    return total


def verify_lemma(lemma_id: str, params: dict, samples: int = DEFAULT_LEMMA_SAMPLES, seed: int = 0,
                 timing: bool = True) -> VerificationReport:
    t0 = time.perf_counter()
    lemma = make_lemma(lemma_id, params)
    n, rank = lemma.n, lemma.rank
    X, W = probe_basis(n, rank)
    exact = lemma.exact()
    mom = _moments(lemma.sample, f"lemma/{lemma_id}", seed, samples, X, W)
    mean, se = mom.mean, mom.stderr()
    extra = {}
    second = getattr(lemma, "second", None)
    if second is not None:
        # two independent estimators of the same integral; each is also gated on its own
        mom2 = _moments(second, f"lemma/{lemma_id}/second", seed, samples, X, W)
        ev = exact.to_vector()
        extra = {"first_estimate": SymTensor.from_vector(n, rank, mean).to_json(),
                 "second_estimate": SymTensor.from_vector(n, rank, mom2.mean).to_json(),
                 "first_z_max": float(z_scores(mean, se, ev).max()),
                 "second_z_max": float(z_scores(mom2.mean, mom2.stderr(), ev).max())}
        extra["sides_pass"] = max(extra["first_z_max"], extra["second_z_max"]) <= Z_GATE
        mean = (mean + mom2.mean) / 2
        se = np.sqrt(se**2 + mom2.stderr() ** 2) / 2
    extra["substreams"] = [f"lemma/{lemma_id}/<chunk>"] + ([f"lemma/{lemma_id}/second/<chunk>"] if second else [])
    query = {"lemma": lemma_id, "params": dict(params)}
    return VerificationReport("lemma", SymTensor.from_vector(n, rank, mean),
                              SymTensor.from_vector(n, rank, se), exact, samples, seed, query,
                              time.perf_counter() - t0 if timing else None, extra)
