"""Convex polytopes with explicit face lattices and normal cones.

Hulls are built by brute force over n-subsets of points, which is plenty for
the small shapes used in verification (n ≤ 4, at most 64 vertices).  All
incidence and feasibility decisions use the single tolerance :data:`EPS`.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

EPS = 1e-9
MAX_HULL_DIM = 4
MAX_HULL_POINTS = 64


class GeometryError(ValueError):
    """Invalid or degenerate geometric input."""


class Intersection(enum.Enum):
    EMPTY = "EMPTY"
    DEGENERATE = "DEGENERATE"


EMPTY = Intersection.EMPTY
DEGENERATE = Intersection.DEGENERATE


def _affine_rank(X: np.ndarray) -> int:
    if len(X) <= 1:
        return 0
    sv = np.linalg.svd(X[1:] - X[0], compute_uv=False)
    scale = max(1.0, float(np.max(np.abs(X))))
    return int(np.sum(sv > EPS * scale))


def _direction_basis(X: np.ndarray, j: int) -> np.ndarray:
    if j == 0:
        return np.zeros((0, X.shape[1]))
    _, _, Vt = np.linalg.svd(X[1:] - X[0])
    return Vt[:j].copy()


@dataclass(frozen=True, eq=False)
class Face:
    """A j-face: vertex indices into the owning polytope, direction basis and incident facets."""

    j: int
    vertices: tuple[int, ...]
    basis: np.ndarray
    point: np.ndarray
    facets: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Polytope:
    """Full-dimensional bounded convex polytope in R^n.

    ``normals``/``offsets`` hold the facet inequalities ⟨a, x⟩ ≤ b with unit
    outward ``a``; ``faces[j]`` lists the j-faces, ``faces[n]`` being P itself.
    """

    n: int
    vertices: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    faces: tuple[tuple[Face, ...], ...] = field(repr=False)

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_vertices(cls, points) -> "Polytope":
        X = np.atleast_2d(np.asarray(points, dtype=float))
        n = X.shape[1]
        if n > MAX_HULL_DIM:
            raise GeometryError(f"hull construction supports n <= {MAX_HULL_DIM}")
        X = _unique_rows(X)
        if len(X) > MAX_HULL_POINTS:
            raise GeometryError(f"hull construction supports at most {MAX_HULL_POINTS} points")
        if len(X) < n + 1 or _affine_rank(X) < n:
            raise GeometryError("points do not span a full-dimensional polytope")
        scale = max(1.0, float(np.max(np.abs(X))))
        tol = EPS * scale
        normals, offsets = _brute_force_facets(X, tol)
        tight = np.abs(X @ normals.T - offsets) <= tol
        keep = [i for i in range(len(X)) if np.linalg.matrix_rank(normals[tight[i]], tol=1e-9) == n]
        V = X[keep]
        return cls._assemble(V, normals, offsets, tol)

    @classmethod
    def from_halfspaces(cls, A, b) -> "Polytope | Intersection":
        """Polytope {x : A x ≤ b}, or EMPTY / DEGENERATE."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        n = A.shape[1]
        if n > 3:
            raise GeometryError("vertex enumeration supports n <= 3")
        nrm = np.linalg.norm(A, axis=1)
        A, b = A / nrm[:, None], b / nrm
        pts = []
        for S in combinations(range(len(A)), n):
            M = A[list(S)]
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            x = np.linalg.solve(M, b[list(S)])
            if np.all(A @ x <= b + EPS * max(1.0, float(np.max(np.abs(x))))):
                pts.append(x)
        if not pts:
            return EMPTY
        X = _unique_rows(np.array(pts))
        if len(X) < n + 1:
            return DEGENERATE
        sv = np.linalg.svd(X - X.mean(axis=0), compute_uv=False)
        if len(sv) < n or sv[n - 1] < EPS:
            return DEGENERATE
        return cls.from_vertices(X)

    @classmethod
    def _assemble(cls, V, normals, offsets, tol) -> "Polytope":
        n = V.shape[1]
        tight = np.abs(V @ normals.T - offsets) <= tol  # (nv, nf)
        facet_sets = [frozenset(np.nonzero(tight[:, f])[0].tolist()) for f in range(len(normals))]
        by_dim: dict[int, list[frozenset]] = {n: [frozenset(range(len(V)))], n - 1: facet_sets}
        for j in range(n - 1, 0, -1):
            seen: dict[frozenset, None] = {}
            for G in by_dim[j]:
                for H in facet_sets:
                    S = G & H
                    if S and S != G and S not in seen and _affine_rank(V[sorted(S)]) == j - 1:
                        seen[S] = None
            by_dim[j - 1] = list(seen)
        if n - 1 >= 1:
            by_dim[0] = [frozenset([v]) for v in range(len(V))]
        faces = []
        for j in range(n + 1):
            row = []
            for S in sorted(by_dim[j], key=lambda s: tuple(sorted(s))):
                idx = tuple(sorted(S))
                inc = tuple(f for f, Fs in enumerate(facet_sets) if S <= Fs)
                X = V[list(idx)]
                row.append(Face(j, idx, _direction_basis(X, j), X.mean(axis=0), inc))
            faces.append(tuple(row))
        return cls(n, V, normals, offsets, tuple(faces))

    # -- queries ---------------------------------------------------------------

    @property
    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(self.faces[j]) for j in range(self.n))

    def face_vertices(self, F: Face) -> np.ndarray:
        return self.vertices[list(F.vertices)]

    def normal_generators(self, F: Face) -> np.ndarray:
        """Outward normals of the facets incident to F; they generate N(P, F)."""
        return self.normals[list(F.facets)]

    def contains(self, x, tol: float = EPS) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.all(x @ self.normals.T <= self.offsets + tol, axis=-1)

    def volume(self) -> float:
        total = 0.0
        for S in triangulate(self, self.faces[self.n][0]):
            total += simplex_volume(S)
        return total

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def to_json(self) -> dict:
        return {"dim": self.n, "vertices": self.vertices.tolist()}

    @classmethod
    def from_json(cls, data) -> "Polytope":
        if isinstance(data, str):
            data = json.loads(data)
        from fractions import Fraction

        V = [[float(Fraction(str(c))) for c in v] for v in data["vertices"]]
        P = cls.from_vertices(V)
        if "dim" in data and int(data["dim"]) != P.n:
            raise GeometryError("declared dim does not match the vertices")
        return P


def _unique_rows(X: np.ndarray) -> np.ndarray:
    out: list[np.ndarray] = []
    for x in X:
        if not any(np.max(np.abs(x - y)) <= EPS * max(1.0, float(np.max(np.abs(x)))) for y in out):
            out.append(x)
    return np.array(out)


def _brute_force_facets(X: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    n = X.shape[1]
    normals: list[np.ndarray] = []
    offsets: list[float] = []
    for S in combinations(range(len(X)), n):
        D = X[list(S[1:])] - X[S[0]]
        if n == 1:
            u = np.array([1.0])
        else:
            _, sv, Vt = np.linalg.svd(D)
            if len(sv) < n - 1 or sv[n - 2] <= tol:
                continue
            u = Vt[n - 1]
        h = float(u @ X[S[0]])
        d = X @ u - h
        if np.all(d <= tol):
            pass
        elif np.all(d >= -tol):
            u, h = -u, -h
        else:
            continue
        if not any(np.max(np.abs(u - v)) <= 1e-7 and abs(h - g) <= 1e-7 for v, g in zip(normals, offsets)):
            normals.append(u)
            offsets.append(h)
    return np.array(normals), np.array(offsets)


# -- support function and normal cones ----------------------------------------


def support_function(P: Polytope, u) -> float:
    return float(np.max(P.vertices @ np.asarray(u, dtype=float)))


def normal_cone_contains(P: Polytope, F: Face, u, tol: float = EPS) -> bool:
    u = np.asarray(u, dtype=float)
    h = support_function(P, u)
    return bool(np.all(P.face_vertices(F) @ u >= h - tol))


def transform(P: Polytope, R, t) -> Polytope:
    """Image of P under x ↦ R x + t, with the face lattice carried along."""
    R = np.asarray(R, dtype=float)
    t = np.asarray(t, dtype=float)
    V = P.vertices @ R.T + t
    N = P.normals @ R.T
    off = P.offsets + N @ t
    faces = tuple(
        tuple(Face(F.j, F.vertices, F.basis @ R.T, R @ F.point + t, F.facets) for F in row)
        for row in P.faces
    )
    return Polytope(P.n, V, N, off, faces)


def scale(P: Polytope, lam: float) -> Polytope:
    """Image of P under x ↦ λx (λ > 0)."""
    if lam <= 0:
        raise GeometryError("scale factor must be positive")
    faces = tuple(
        tuple(Face(F.j, F.vertices, F.basis, lam * F.point, F.facets) for F in row) for row in P.faces
    )
    return Polytope(P.n, lam * P.vertices, P.normals, lam * P.offsets, faces)


def intersect(P: Polytope, Q: Polytope) -> Polytope | Intersection:
    if P.n != Q.n:
        raise GeometryError("polytopes live in different dimensions")
    A = np.vstack([P.normals, Q.normals])
    b = np.concatenate([P.offsets, Q.offsets])
    return Polytope.from_halfspaces(A, b)


def translation_window(P: Polytope, Q: Polytope) -> "RegionSpec":
    """Axis box containing every t with P ∩ (Q + t) ≠ ∅."""
    lo = P.vertices.min(axis=0) - Q.vertices.max(axis=0)
    hi = P.vertices.max(axis=0) - Q.vertices.min(axis=0)
    return RegionSpec.box(lo, hi)


# -- regions ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RegionSpec:
    """Spatial region β: everything, a halfspace ⟨a,x⟩ ≤ b, or an axis box."""

    kind: str = "all"
    a: np.ndarray | None = None
    b: float = 0.0
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    @classmethod
    def all(cls) -> "RegionSpec":
        return cls("all")

    @classmethod
    def halfspace(cls, a, b) -> "RegionSpec":
        a = np.asarray(a, dtype=float)
        nrm = np.linalg.norm(a)
        if abs(nrm - 1.0) > 1e-9:
            raise GeometryError("halfspace normal must be a unit vector")
        return cls("halfspace", a=a, b=float(b))

    @classmethod
    def box(cls, lo, hi) -> "RegionSpec":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise GeometryError("box needs lo <= hi componentwise")
        return cls("box", lo=lo, hi=hi)

    def halfspaces(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "all":
            return np.zeros((0, n)), np.zeros(0)
        if self.kind == "halfspace":
            return self.a[None, :].copy(), np.array([self.b])
        I = np.eye(n)
        return np.vstack([I, -I]), np.concatenate([self.hi, -self.lo])

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "all":
            return np.ones(x.shape[:-1], dtype=bool)
        if self.kind == "halfspace":
            return x @ self.a <= self.b
        return np.all((x >= self.lo) & (x <= self.hi), axis=-1)

    def volume(self) -> float:
        if self.kind != "box":
            return math.inf
        return float(np.prod(self.hi - self.lo))

    def translated(self, t) -> "RegionSpec":
        t = np.asarray(t, dtype=float)
        if self.kind == "all":
            return self
        if self.kind == "halfspace":
            return RegionSpec("halfspace", a=self.a, b=self.b + float(self.a @ t))
        return RegionSpec("box", lo=self.lo + t, hi=self.hi + t)

    def rotated(self, R) -> "RegionSpec":
        """Image under a rotation; axis boxes are not rotation stable."""
        R = np.asarray(R, dtype=float)
        if self.kind == "all":
            return self
        if self.kind == "halfspace":
            return RegionSpec("halfspace", a=R @ self.a, b=self.b)
        if np.allclose(R, np.eye(len(R))):
            return self
        raise GeometryError("an axis box is not closed under rotation")

    def scaled(self, lam: float) -> "RegionSpec":
        if self.kind == "all":
            return self
        if self.kind == "halfspace":
            return RegionSpec("halfspace", a=self.a, b=lam * self.b)
        return RegionSpec("box", lo=lam * self.lo, hi=lam * self.hi)

    def to_json(self) -> dict:
        if self.kind == "all":
            return {"kind": "all"}
        if self.kind == "halfspace":
            return {"kind": "halfspace", "a": self.a.tolist(), "b": self.b}
        return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True, eq=False)
class SphereRegion:
    """Direction region ω: the whole sphere or the cap {u : ⟨u, v⟩ ≥ τ}."""

    kind: str = "all"
    v: np.ndarray | None = None
    tau: float = -1.0

    @classmethod
    def all(cls) -> "SphereRegion":
        return cls("all")

    @classmethod
    def cap(cls, v, tau) -> "SphereRegion":
        v = np.asarray(v, dtype=float)
        if abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise GeometryError("cap axis must be a unit vector")
        if not -1.0 <= tau <= 1.0:
            raise GeometryError("cap threshold must lie in [-1, 1]")
        return cls("cap", v=v, tau=float(tau))

    def contains(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.kind == "all":
            return np.ones(u.shape[:-1], dtype=bool)
        return u @ self.v >= self.tau

    def rotated(self, R) -> "SphereRegion":
        if self.kind == "all":
            return self
        return SphereRegion("cap", v=np.asarray(R, dtype=float) @ self.v, tau=self.tau)

    def to_json(self) -> dict:
        if self.kind == "all":
            return {"kind": "all"}
        return {"kind": "cap", "v": self.v.tolist(), "tau": self.tau}


# -- triangulation and clipping -----------------------------------------------


def simplex_volume(S: np.ndarray) -> float:
    """j-dimensional volume of the simplex with vertex rows S."""
    j = len(S) - 1
    if j == 0:
        return 1.0
    D = S[1:] - S[0]
    return math.sqrt(max(np.linalg.det(D @ D.T), 0.0)) / math.factorial(j)


def triangulate(P: Polytope, G: Face) -> list[np.ndarray]:
    """Fan triangulation of the face G into simplices (arrays of vertex rows)."""
    d = G.j
    verts = G.vertices
    if d == 0:
        return [P.vertices[list(verts)]]
    if d == 1:
        return [P.vertices[list(verts)]]
    apex = verts[0]
    gs = set(verts)
    out = []
    for H in P.faces[d - 1]:
        hs = set(H.vertices)
        if hs <= gs and apex not in hs:
            for S in triangulate(P, H):
                out.append(np.vstack([P.vertices[apex], S]))
    return out


def _clip_segment(S: np.ndarray, A: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    p, q = S
    t0, t1 = 0.0, 1.0
    for a, c in zip(A, b):
        fp, fq = a @ p - c, a @ q - c
        if fp > 0 and fq > 0:
            return None
        if fp > 0:
            t0 = max(t0, fp / (fp - fq))
        elif fq > 0:
            t1 = min(t1, fp / (fp - fq))
    if t1 - t0 <= 1e-12:
        return None
    return np.vstack([p + t0 * (q - p), p + t1 * (q - p)])


def clip_face(P: Polytope, F: Face, beta: RegionSpec) -> list[np.ndarray]:
    """F ∩ β triangulated into j-simplices (ambient coordinates)."""
    if beta.kind == "all":
        return triangulate(P, F)
    A, b = beta.halfspaces(P.n)
    X = P.face_vertices(F)
    if F.j == 0:
        return [X] if np.all(A @ X[0] <= b + EPS) else []
    if F.j == 1:
        seg = _clip_segment(X, A, b)
        return [] if seg is None else [seg]
    # work in coordinates of aff(F)
    x0 = F.point
    B = F.basis
    Y = (X - x0) @ B.T
    local = Polytope.from_vertices(Y)
    Al = np.vstack([local.normals, A @ B.T])
    bl = np.concatenate([local.offsets, b - A @ x0])
    # constraints parallel to the face are either vacuous or kill it
    nz = np.linalg.norm(Al, axis=1) > 1e-14
    if np.any(bl[~nz] < -EPS):
        return []
    cell = Polytope.from_halfspaces(Al[nz], bl[nz])
    if isinstance(cell, Intersection):
        return []
    out = []
    for S in triangulate(cell, cell.faces[cell.n][0]):
        if simplex_volume(S) > 1e-12:
            out.append(x0 + S @ B)
    return out


# -- nearest points -----------------------------------------------------------


def nearest_points(P: Polytope, X: np.ndarray, chunk: int = 1 << 16) -> tuple[np.ndarray, np.ndarray]:
    """Metric projections of the rows of X onto P and an ``inside`` mask."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out_p = np.empty_like(X)
    out_in = np.empty(len(X), dtype=bool)
    for s in range(0, len(X), chunk):
        p, inside = _nearest_chunk(P, X[s:s + chunk])
        out_p[s:s + chunk] = p
        out_in[s:s + chunk] = inside
    return out_p, out_in


def _nearest_chunk(P: Polytope, X: np.ndarray):
    inside = P.contains(X)
    best = np.where(inside[:, None], X, np.nan)
    best_d = np.where(inside, 0.0, np.inf)
    for j in range(P.n):
        for F in P.faces[j]:
            x0 = P.vertices[F.vertices[0]]
            C = x0 + ((X - x0) @ F.basis.T) @ F.basis if F.j else np.broadcast_to(x0, X.shape)
            ok = P.contains(C)
            D = X - C
            # x - c must lie in N(P, F): c maximizes ⟨x - c, ·⟩ over P
            dn = np.linalg.norm(D, axis=1)
            gap = (P.vertices @ D.T) - np.sum(D * C, axis=1)
            ok &= np.all(gap <= EPS * np.maximum(dn, 1.0), axis=0)
            better = ok & (dn < best_d) & ~inside
            best[better] = C[better]
            best_d[better] = dn[better]
    return best, inside


def nearest_point(P: Polytope, x) -> tuple[np.ndarray, np.ndarray | None]:
    """(p(P, x), u(P, x)); u is None when x ∈ P."""
    p, inside = nearest_points(P, np.asarray(x, dtype=float)[None, :])
    if inside[0]:
        return np.asarray(x, dtype=float), None
    d = np.asarray(x, dtype=float) - p[0]
    return p[0], d / np.linalg.norm(d)


# -- catalog ------------------------------------------------------------------


def catalog(name: str, *params, dim: int = 2) -> Polytope:
    """Named shapes: cube(side), box(lo, hi), simplex, crosspoly, ngon(m, r)."""
    if name == "cube":
        a = float(params[0]) if params else 1.0
        lo, hi = np.zeros(dim), np.full(dim, a)
        return catalog("box", lo, hi)
    if name == "box":
        lo, hi = (np.asarray(p, dtype=float) for p in params)
        corners = [[hi[i] if (mask >> i) & 1 else lo[i] for i in range(len(lo))]
                   for mask in range(1 << len(lo))]
        return Polytope.from_vertices(corners)
    if name == "simplex":
        return Polytope.from_vertices(np.vstack([np.zeros(dim), np.eye(dim)]))
    if name == "crosspoly":
        return Polytope.from_vertices(np.vstack([np.eye(dim), -np.eye(dim)]))
    if name == "ngon":
        m = int(params[0])
        r = float(params[1]) if len(params) > 1 else 1.0
        ang = 2 * np.pi * np.arange(m) / m
        return Polytope.from_vertices(np.column_stack([r * np.cos(ang), r * np.sin(ang)]))
    raise GeometryError(f"unknown catalog shape {name!r}")


def parse_polytope(spec: str, dim: int = 2) -> Polytope:
    """Parse ``cube:1.0``, ``box:lo1,lo2:hi1,hi2``, ``simplex``, ``crosspoly`` or ``ngon:m,r``."""
    name, _, rest = spec.partition(":")
    if name == "cube":
        return catalog("cube", float(rest) if rest else 1.0, dim=dim)
    if name == "box":
        lo, _, hi = rest.partition(":")
        return catalog("box", _floats(lo), _floats(hi))
    if name in ("simplex", "crosspoly"):
        return catalog(name, dim=dim)
    if name == "ngon":
        vals = rest.split(",")
        return catalog("ngon", int(vals[0]), float(vals[1]) if len(vals) > 1 else 1.0)
    raise GeometryError(f"unknown polytope spec {spec!r}")


def parse_region(spec: str | None) -> RegionSpec:
    """Parse ``all``, ``halfspace:a1,a2:b`` or ``box:lo1,lo2:hi1,hi2``."""
    if spec is None or spec == "all":
        return RegionSpec.all()
    kind, _, rest = spec.partition(":")
    first, _, second = rest.partition(":")
    if kind == "halfspace":
        a = np.array(_floats(first))
        return RegionSpec.halfspace(a / np.linalg.norm(a), float(second) / np.linalg.norm(a))
    if kind == "box":
        return RegionSpec.box(_floats(first), _floats(second))
    raise GeometryError(f"unknown region spec {spec!r}")


def parse_sphere_region(spec: str | None) -> SphereRegion:
    """Parse ``all`` or ``cap:v1,v2:tau`` (v is normalized)."""
    if spec is None or spec == "all":
        return SphereRegion.all()
    kind, _, rest = spec.partition(":")
    first, _, second = rest.partition(":")
    if kind != "cap":
        raise GeometryError(f"unknown direction region {spec!r}")
    v = np.array(_floats(first))
    return SphereRegion.cap(v / np.linalg.norm(v), float(second))


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def face_lattice_summary(P: Polytope) -> dict:
    return {"f_vector": list(P.f_vector), "euler": sum((-1) ** j * len(P.faces[j]) for j in range(P.n + 1))}

