"""Generalized local Minkowski tensors of polytopes and the local Steiner check.

For a j-face F of P the contribution to φ_j^{r,s,l}(P, β × ω) is

    c_{n,j}^{r,s,l} / ω_{n-j} · Q(F)^l · ∫_{F∩β} x^r dH^j · ∫_{N(P,F)∩S∩ω} u^s dH^{n-j-1}.

Position integrals use the Dirichlet moment formula on a triangulation of
F ∩ β.  Direction integrals are closed-form when the normal cone has sphere
dimension d ≤ 1, use product Gauss quadrature on the spherical polygon when
d = 2 and ω is the whole sphere, and Monte Carlo otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import exactnum as ex
from .polytope import (
    EPS,
    Face,
    Polytope,
    RegionSpec,
    SphereRegion,
    clip_face,
    nearest_points,
    scale,
    simplex_volume,
    transform,
    triangulate,
)
from .quadrature import arc_intervals_in_cap, arc_moment, power_sum_coeffs, spherical_polygon_nodes, trig_moment
from .subspaces import RngStream, Subspace, complement, sphere_points
from .symtensor import (
    SymTensor,
    max_abs_diff,
    linear_form,
    metric_q,
    monomials,
    multinomial,
    power_of_vector,
    q_of_subspace,
    sym_mul,
    sym_pow,
)

DEFAULT_MC_SAMPLES = 100_000
METHOD_RANK = {"exact": 0, "quad": 1, "mc": 2}


class MeasureError(ValueError):
    """Invalid measure specification or unavailable evaluation method."""


@dataclass(frozen=True, eq=False)
class MeasureSpec:
    j: int
    r: int = 0
    s: int = 0
    l: int = 0
    beta: RegionSpec = field(default_factory=RegionSpec.all)
    omega: SphereRegion = field(default_factory=SphereRegion.all)

    @property
    def rank(self) -> int:
        return self.r + self.s + 2 * self.l

    def validate(self, n: int):
        if min(self.j, self.r, self.s, self.l) < 0 or self.j > n:
            raise MeasureError(f"invalid indices for n={n}: {self}")
        if self.j == n and (self.s != 0 or self.omega.kind != "all"):
            raise MeasureError("the top-degree measure needs s = 0 and ω = ALL")

    def to_json(self) -> dict:
        return {"j": self.j, "r": self.r, "s": self.s, "l": self.l,
                "beta": self.beta.to_json(), "omega": self.omega.to_json()}


@dataclass(frozen=True, eq=False)
class MeasureResult:
    """Tensor value with per-coordinate standard error (zero on exact paths)."""

    tensor: SymTensor
    stderr: SymTensor
    method: str

    def to_json(self) -> dict:
        return {"tensor": self.tensor.to_json(), "stderr": self.stderr.to_json(), "method": self.method}


# -- position moments ----------------------------------------------------------


def _complete_homogeneous(forms: list[SymTensor], r: int) -> SymTensor:
    n = forms[0].dim
    # h[k] = h_k(forms seen so far)
    h = [SymTensor.scalar(1.0, n)] + [SymTensor.zero(n, k) for k in range(1, r + 1)]
    for f in forms:
        powers = [SymTensor.scalar(1.0, n)]
        for _ in range(r):
            powers.append(sym_mul(powers[-1], f))
        h = [sum((sym_mul(powers[a], h[k - a]) for a in range(1, k + 1)), h[k]) if k else h[0]
             for k in range(r + 1)]
    return h[r]


def simplex_moment(S, r: int) -> SymTensor:
    """∫_Δ ⟨y, x⟩^r dH^j(y) over the simplex with vertex rows S."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    j = len(S) - 1
    vol = simplex_volume(S)
    if j and vol <= 1e-300:
        raise MeasureError("degenerate simplex")
    if r == 0:
        return SymTensor.scalar(vol, S.shape[1])
    h = _complete_homogeneous([linear_form(v) for v in S], r)
    return h * (vol * math.factorial(r) * math.factorial(j) / math.factorial(r + j))


def region_moment(P: Polytope, F: Face, beta: RegionSpec, r: int) -> SymTensor | None:
    """∫_{F∩β} x^r, or None when F ∩ β is empty."""
    cells = clip_face(P, F, beta)
    if not cells:
        return None
    out = SymTensor.zero(P.n, r)
    for S in cells:
        if F.j and simplex_volume(S) < 1e-12:
            continue
        out = out + simplex_moment(S, r)
    return out


# -- direction moments -------------------------------------------------------


def _extreme_pair(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if len(G) == 2:
        return G[0], G[1]
    best, pair = 2.0, (0, 1)
    for a in range(len(G)):
        for b in range(a + 1, len(G)):
            d = float(G[a] @ G[b])
            if d < best:
                best, pair = d, (a, b)
    return G[pair[0]], G[pair[1]]


def _arc_frame(a, b) -> tuple[np.ndarray, np.ndarray, float]:
    w = b - (a @ b) * a
    w /= np.linalg.norm(w)
    theta = float(np.arccos(np.clip(a @ b, -1.0, 1.0)))
    return a, w, theta


def _arc_pieces(a, w, theta, omega: SphereRegion) -> list[tuple[float, float]]:
    if omega.kind == "all":
        return [(0.0, theta)]
    return arc_intervals_in_cap(a, w, theta, omega.v, omega.tau)


def cone_sphere_moment(P: Polytope, F: Face, omega: SphereRegion, s: int, method: str = "auto",
                       rng: RngStream | None = None, samples: int = DEFAULT_MC_SAMPLES):
    """∫_{N(P,F)∩S∩ω} u^s as ``(tensor, per-sample matrix or None, method)``.

    The per-sample matrix (only for Monte Carlo) holds the coefficient vector
    of every sample's contribution, so callers can propagate standard errors
    through later linear maps.
    """
    n = P.n
    d = n - 1 - F.j
    if d < 0:
        raise MeasureError("the top face has no normal cone on the sphere")
    G = P.normal_generators(F)
    if method == "exact" and d >= 2:
        raise MeasureError("exact cone moments are available only for sphere dimension ≤ 1")
    if method in ("auto", "exact") and d == 0:
        u = G[0]
        if omega.contains(u):
            return power_of_vector(u, s), None, "exact"
        return SymTensor.zero(n, s), None, "exact"
    if method in ("auto", "exact") and d == 1:
        a, w, theta = _arc_frame(*_extreme_pair(G))
        out = SymTensor.zero(n, s)
        for t0, t1 in _arc_pieces(a, w, theta, omega):
            out = out + arc_moment(a, w, t0, t1, s)
        return out, None, "exact"
    if method in ("auto", "quad") and d == 2 and omega.kind == "all":
        C = complement(Subspace(n, F.basis)).basis  # 3 × n
        X, wts = spherical_polygon_nodes(G @ C.T)
        return SymTensor.from_vector(n, s, power_sum_coeffs(X @ C, wts, s)), None, "quad"
    if method == "quad":
        raise MeasureError("quadrature needs sphere dimension 2 and ω = ALL")
    if rng is None:
        raise MeasureError("a Monte Carlo cone moment needs an RngStream")
    if samples <= 0:
        raise MeasureError("Monte Carlo budget must be positive")
    C = complement(Subspace(n, F.basis)).basis
    U = sphere_points(rng, C.shape[0], samples) @ C
    h = np.max(U @ P.vertices.T, axis=1)
    on_face = np.min(U @ P.face_vertices(F).T, axis=1) >= h - EPS
    acc = on_face & omega.contains(U)
    area = float(ex.omega(C.shape[0]))
    per = np.zeros((samples, len(monomials(n, s))))
    if np.any(acc):
        Ua = U[acc]
        for idx, e in enumerate(monomials(n, s)):
            per[acc, idx] = area * multinomial(e) * np.prod(Ua ** np.asarray(e), axis=1)
    return SymTensor.from_vector(n, s, per.mean(axis=0)), per, "mc"


# -- the measures ------------------------------------------------------------


def _mul_matrix(A: SymTensor, rank_b: int) -> np.ndarray:
    """Matrix of B ↦ A·B on coefficient vectors of rank ``rank_b``."""
    n = A.dim
    cols = []
    for e in monomials(n, rank_b):
        cols.append(sym_mul(A, SymTensor(n, rank_b, {e: 1.0})).to_vector())
    return np.array(cols).T


def local_minkowski(P: Polytope, spec: MeasureSpec, method: str = "auto",
                    rng: RngStream | None = None, samples: int = DEFAULT_MC_SAMPLES) -> MeasureResult:
    """φ_j^{r,s,l}(P, β × ω) with its evaluation method and standard errors."""
    n = P.n
    spec.validate(n)
    rank = spec.rank
    zero = SymTensor.zero(n, rank)
    if spec.j == 0 and spec.l >= 1:
        return MeasureResult(zero, zero, "exact")
    c = float(ex.c_normalizing(n, spec.j, spec.r, spec.s, spec.l))
    if spec.j == n:
        mom = region_moment(P, P.faces[n][0], spec.beta, spec.r)
        if mom is None:
            return MeasureResult(zero, zero, "exact")
        return MeasureResult(sym_mul(sym_pow(metric_q(n), spec.l), mom) * c, zero, "exact")
    face_scale = c / float(ex.omega(n - spec.j))
    total = zero
    var = np.zeros(len(monomials(n, rank)))
    used = "exact"
    for fi, F in enumerate(P.faces[spec.j]):
        mom = region_moment(P, F, spec.beta, spec.r)
        if mom is None:
            continue
        pref = sym_mul(sym_pow(q_of_subspace(F.basis, n), spec.l), mom) * face_scale
        if pref.is_zero():
            continue
        sub = rng.substream(f"face{spec.j}.{fi}") if rng is not None else None
        cone, per, how = cone_sphere_moment(P, F, spec.omega, spec.s, method, sub, samples)
        if METHOD_RANK[how] > METHOD_RANK[used]:
            used = how
        total = total + sym_mul(pref, cone)
        if per is not None:
            M = _mul_matrix(pref, spec.s)
            contrib = per @ M.T
            var += contrib.var(axis=0, ddof=1) / len(contrib)
    return MeasureResult(total, SymTensor.from_vector(n, rank, np.sqrt(var)), used)


def local_minkowski_tensor(P: Polytope, spec: MeasureSpec, **kwargs) -> SymTensor:
    return local_minkowski(P, spec, **kwargs).tensor


def curvature_measure(P: Polytope, j: int, beta: RegionSpec | None = None, **kwargs) -> float:
    spec = MeasureSpec(j, beta=beta or RegionSpec.all())
    return float(local_minkowski_tensor(P, spec, **kwargs))


def support_measure(P: Polytope, j: int, beta: RegionSpec | None = None,
                    omega: SphereRegion | None = None, **kwargs) -> MeasureResult:
    """Λ_j(P, β × ω), which coincides with φ_j^{0,0,0} on product sets."""
    spec = MeasureSpec(j, beta=beta or RegionSpec.all(), omega=omega or SphereRegion.all())
    return local_minkowski(P, spec, **kwargs)


def intrinsic_volumes(P: Polytope) -> list[float]:
    return [curvature_measure(P, j) for j in range(P.n + 1)]


# -- lower-dimensional sections ------------------------------------------------


@dataclass(frozen=True, eq=False)
class Section:
    """The polytope P ∩ {⟨a, x⟩ = b}, stored in coordinates of the hyperplane."""

    n: int
    local: Polytope
    origin: np.ndarray
    frame: np.ndarray  # (n-1) × n orthonormal basis of a^⊥
    a: np.ndarray


def hyperplane_section(P: Polytope, a, b) -> Section | None:
    """Slice P by the hyperplane ⟨a,x⟩ = b (None when it misses the interior)."""
    a = np.asarray(a, dtype=float)
    a = a / np.linalg.norm(a)
    frame = complement(Subspace(P.n, a[None, :])).basis
    origin = b * a
    A = P.normals @ frame.T
    off = P.offsets - P.normals @ origin
    keep = np.linalg.norm(A, axis=1) > 1e-12
    if np.any(off[~keep] < -EPS):
        return None
    cell = Polytope.from_halfspaces(A[keep], off[keep])
    if not isinstance(cell, Polytope):
        return None
    return Section(P.n, cell, origin, frame, a)


def _lift(sec: Section, Y: np.ndarray) -> np.ndarray:
    return sec.origin + Y @ sec.frame


def section_measure(sec: Section, spec: MeasureSpec) -> SymTensor:
    """φ_j^{r,s,l} of the (n-1)-dimensional polytope described by ``sec``.

    Its normal cone at a face G is N_H(G) ⊕ R·a, with N_H the normal cone
    inside the hyperplane.  Writing u = cos φ·v + sin φ·a splits the sphere
    integral into a latitude factor and a lower-dimensional cone moment.
    """
    n = sec.n
    K = sec.local
    spec.validate(n)
    rank = spec.rank
    zero = SymTensor.zero(n, rank)
    if spec.omega.kind != "all":
        raise MeasureError("sections support ω = ALL only")
    if spec.j == 0 and spec.l >= 1:
        return zero
    if spec.j == n:
        return zero
    c = float(ex.c_normalizing(n, spec.j, spec.r, spec.s, spec.l)) / float(ex.omega(n - spec.j))
    A_beta, b_beta = spec.beta.halfspaces(n)
    total = zero
    for G in K.faces[spec.j]:
        cells = _section_cells(sec, G, A_beta, b_beta)
        if not cells:
            continue
        mom = SymTensor.zero(n, spec.r)
        for S in cells:
            mom = mom + simplex_moment(S, spec.r)
        basis = G.basis @ sec.frame if G.j else np.zeros((0, n))
        pref = sym_mul(sym_pow(q_of_subspace(basis, n), spec.l), mom) * c
        total = total + sym_mul(pref, _section_cone_moment(sec, G, spec.s))
    return total


def _section_cells(sec: Section, G: Face, A, b) -> list[np.ndarray]:
    K = sec.local
    if len(A) == 0:
        return [_lift(sec, S) for S in triangulate(K, G)]
    # pull β back to hyperplane coordinates as a generic halfspace list
    Al = A @ sec.frame.T
    bl = b - A @ sec.origin
    cells = []
    for S in triangulate(K, G):
        piece = _clip_simplex(S, Al, bl)
        cells.extend(_lift(sec, X) for X in piece)
    return cells


def _clip_simplex(S: np.ndarray, A: np.ndarray, b: np.ndarray) -> list[np.ndarray]:
    """Clip a simplex by halfspaces, returning a triangulation of the result."""
    j = len(S) - 1
    if j == 0:
        return [S] if np.all(A @ S[0] <= b + EPS) else []
    dim = S.shape[1]
    x0 = S.mean(axis=0)
    if j < dim:
        basis = Subspace.span(S[1:] - S[0], dim).basis
    else:
        basis = np.eye(dim)
    Y = (S - x0) @ basis.T
    cell = Polytope.from_vertices(Y)
    Al = np.vstack([cell.normals, A @ basis.T])
    bl = np.concatenate([cell.offsets, b - A @ x0])
    nz = np.linalg.norm(Al, axis=1) > 1e-14
    if np.any(bl[~nz] < -EPS):
        return []
    clipped = Polytope.from_halfspaces(Al[nz], bl[nz])
    if not isinstance(clipped, Polytope):
        return []
    return [x0 + T @ basis for T in triangulate(clipped, clipped.faces[clipped.n][0])
            if simplex_volume(T) > 1e-12]


def _section_cone_moment(sec: Section, G: Face, s: int) -> SymTensor:
    n = sec.n
    K = sec.local
    a = sec.a
    m = K.n - G.j  # dimension of the in-hyperplane normal cone
    if m == 0:
        return power_of_vector(a, s) + power_of_vector(-a, s)
    out = SymTensor.zero(n, s)
    gens = K.normal_generators(G) @ sec.frame
    for k in range(0, s + 1, 2):
        lat = trig_moment(s - k + m - 1, k, -math.pi / 2, math.pi / 2)
        inner = _inplane_cone_moment(gens, m, s - k)
        out = out + sym_mul(inner, power_of_vector(a, k)) * (math.comb(s, k) * lat)
    return out


def _inplane_cone_moment(gens: np.ndarray, m: int, s: int) -> SymTensor:
    if m == 1:
        return power_of_vector(gens[0], s)
    if m == 2:
        a, w, theta = _arc_frame(*_extreme_pair(gens))
        return arc_moment(a, w, 0.0, theta, s)
    raise MeasureError("sections are supported for n ≤ 3")


# -- structural checks ---------------------------------------------------------


@dataclass
class CheckEntry:
    name: str
    diff: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.diff <= self.tol

    def to_json(self) -> dict:
        return {"name": self.name, "diff": float(self.diff), "tol": float(self.tol), "pass": bool(self.passed)}


def _diff(A: SymTensor, B: SymTensor) -> float:
    return max_abs_diff(A, B)


def covariance_and_valuation_checks(P: Polytope, spec: MeasureSpec, R=None, t=None,
                                    hyperplane=None, lams=(0.5, 2.0), tol: float = 1e-8) -> list[CheckEntry]:
    """Translation, rotation, valuation and homogeneity checks on exact paths."""
    n = P.n
    base = local_minkowski_tensor(P, spec)
    out: list[CheckEntry] = []
    if t is not None:
        t = np.asarray(t, dtype=float)
        moved = transform(P, np.eye(n), t)
        lhs = local_minkowski_tensor(moved, MeasureSpec(spec.j, spec.r, spec.s, spec.l,
                                                        spec.beta.translated(t), spec.omega))
        rhs = SymTensor.zero(n, spec.rank)
        for i in range(spec.r + 1):
            lower = local_minkowski_tensor(P, MeasureSpec(spec.j, spec.r - i, spec.s, spec.l,
                                                          spec.beta, spec.omega))
            rhs = rhs + sym_mul(lower, power_of_vector(t, i)) * (1.0 / math.factorial(i))
        out.append(CheckEntry("translation", _diff(lhs, rhs), tol))
    if R is not None:
        R = np.asarray(R, dtype=float)
        lhs = local_minkowski_tensor(transform(P, R, np.zeros(n)),
                                     MeasureSpec(spec.j, spec.r, spec.s, spec.l,
                                                 spec.beta.rotated(R), spec.omega.rotated(R)))
        out.append(CheckEntry("rotation", _diff(lhs, base.rotate(R)), tol))
    if hyperplane is not None:
        a, b = hyperplane
        a = np.asarray(a, dtype=float)
        a = a / np.linalg.norm(a)
        lo = Polytope.from_halfspaces(np.vstack([P.normals, a]), np.append(P.offsets, b))
        hi = Polytope.from_halfspaces(np.vstack([P.normals, -a]), np.append(P.offsets, -b))
        sec = hyperplane_section(P, a, b)
        if not (isinstance(lo, Polytope) and isinstance(hi, Polytope) and sec is not None):
            raise MeasureError("splitting hyperplane must cross the interior")
        lhs = local_minkowski_tensor(lo, spec) + local_minkowski_tensor(hi, spec)
        rhs = base + section_measure(sec, spec)
        out.append(CheckEntry("valuation", _diff(lhs, rhs), tol))
    for lam in lams or ():
        lhs = local_minkowski_tensor(scale(P, lam), MeasureSpec(spec.j, spec.r, spec.s, spec.l,
                                                                spec.beta.scaled(lam), spec.omega))
        out.append(CheckEntry(f"homogeneity(λ={lam})", _diff(lhs, base * lam ** (spec.j + spec.r)), tol))
    return out


# -- local Steiner formula ---------------------------------------------------


def local_parallel_volume_mc(P: Polytope, beta: RegionSpec, omega: SphereRegion, eps: float,
                             rng: RngStream, samples: int, batch: int = 1 << 16) -> tuple[float, float]:
    """Monte Carlo volume of M_ε(P, β × ω), returned as (estimate, standard error)."""
    if eps <= 0:
        raise MeasureError("ε must be positive")
    lo, hi = P.bounding_box()
    lo, hi = lo - eps, hi + eps
    box_vol = float(np.prod(hi - lo))
    hits = 0
    done = 0
    b = 0
    while done < samples:
        m = min(batch, samples - done)
        X = lo + (hi - lo) * rng.substream(f"steiner{b}").uniform((m, P.n))
        p, inside = nearest_points(P, X)
        D = X - p
        dist = np.linalg.norm(D, axis=1)
        ok = ~inside & (dist <= eps) & (dist > 0)
        U = np.zeros_like(D)
        U[ok] = D[ok] / dist[ok, None]
        ok &= beta.contains(p) & omega.contains(U)
        hits += int(np.count_nonzero(ok))
        done += m
        b += 1
    frac = hits / samples
    return box_vol * frac, box_vol * math.sqrt(frac * (1 - frac) / samples)


def local_steiner_polynomial(P: Polytope, beta: RegionSpec, omega: SphereRegion, eps: float,
                             rng: RngStream | None = None) -> float:
    """Σ_{j<n} κ_{n-j} Λ_j(P, β × ω) ε^{n-j} from the face formula."""
    total = 0.0
    for j in range(P.n):
        lam = support_measure(P, j, beta, omega, rng=rng)
        total += float(ex.kappa(P.n - j)) * float(lam.tensor) * eps ** (P.n - j)
    return total
