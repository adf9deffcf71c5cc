"""Compiled per-sample kernel for the kinematic Monte Carlo estimator (n = 2, 3).

One call processes a batch of rigid motions (ϑ, t).  For each motion it
intersects P with ϑP' + t from the stacked halfspace lists, enumerates the
vertices of K = P ∩ (ϑP' + t) and of K ∩ R (R = β ∩ (ϑβ' + t)) with bitmasks
of tight planes, and integrates

    w(x, u) = ⟨x,X⟩^{r̂} ⟨ϑᵀ(x−t),X⟩^{r̄} Q(F)(X)^l ⟨u,X⟩^s

over the j-faces of K at each probe point X.  The caller turns probe values
into tensor coefficients.

Plane layout in ``A, b``: P planes, P' planes (P' frame), β planes, β' planes
(P' frame).  Moving planes are transformed per sample.
"""

from __future__ import annotations

import math

import numpy as np

from ._jit import njit

TIGHT_TOL = 1e-9
MERGE_TOL = 1e-9
WIDTH_TOL = 1e-9
SOLVE_TOL = 1e-12


@njit
def _binom(a, b):
    if b < 0 or b > a:
        return 0.0
    out = 1.0
    for i in range(b):
        out = out * (a - i) / (i + 1)
    return out


@njit
def trig_moment(p, q, t0, t1):
    """∫_{t0}^{t1} cos^p θ sin^q θ dθ via the exponential expansion."""
    re = 0.0
    im = 0.0
    for a in range(p + 1):
        for c in range(q + 1):
            k = 2 * a - p + 2 * c - q
            coef = _binom(p, a) * _binom(q, c)
            if (q - c) % 2 == 1:
                coef = -coef
            if k == 0:
                re += coef * (t1 - t0)
            else:
                # (e^{ik t1} - e^{ik t0}) / (ik)
                re += coef * (math.sin(k * t1) - math.sin(k * t0)) / k
                im += coef * (-(math.cos(k * t1) - math.cos(k * t0))) / k
    # divide by 2^p (2i)^q; i^q cycles through 1, i, -1, -i
    scale = 2.0 ** (p + q)
    r = q % 4
    if r == 0:
        return re / scale
    if r == 1:
        return im / scale
    if r == 2:
        return -re / scale
    return -im / scale


@njit
def _dot(a, b):
    acc = 0.0
    for i in range(a.shape[0]):
        acc += a[i] * b[i]
    return acc


@njit
def _cross(a, b):
    out = np.empty(3)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


@njit
def _solve(M, rhs, n, out):
    if n == 2:
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if abs(det) < SOLVE_TOL:
            return False
        out[0] = (rhs[0] * M[1, 1] - M[0, 1] * rhs[1]) / det
        out[1] = (M[0, 0] * rhs[1] - rhs[0] * M[1, 0]) / det
        return True
    c00 = M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1]
    c01 = M[1, 2] * M[2, 0] - M[1, 0] * M[2, 2]
    c02 = M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0]
    det = M[0, 0] * c00 + M[0, 1] * c01 + M[0, 2] * c02
    if abs(det) < SOLVE_TOL:
        return False
    inv = np.empty((3, 3))
    inv[0, 0] = c00
    inv[1, 0] = c01
    inv[2, 0] = c02
    inv[0, 1] = M[0, 2] * M[2, 1] - M[0, 1] * M[2, 2]
    inv[1, 1] = M[0, 0] * M[2, 2] - M[0, 2] * M[2, 0]
    inv[2, 1] = M[0, 1] * M[2, 0] - M[0, 0] * M[2, 1]
    inv[0, 2] = M[0, 1] * M[1, 2] - M[0, 2] * M[1, 1]
    inv[1, 2] = M[0, 2] * M[1, 0] - M[0, 0] * M[1, 2]
    inv[2, 2] = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    for i in range(3):
        out[i] = (inv[i, 0] * rhs[0] + inv[i, 1] * rhs[1] + inv[i, 2] * rhs[2]) / det
    return True


@njit
def _enumerate_vertices(A, b, nK, n, V, masks, isK, inR):
    """Vertices of K (planes < nK) and of K ∩ R; returns the vertex count.

    ``isK`` marks vertices of K, ``inR`` vertices satisfying the R planes.
    Duplicate solutions are merged by OR-ing their tight masks.
    """
    m = A.shape[0]
    M = np.empty((n, n))
    rhs = np.empty(n)
    x = np.empty(n)
    cnt = 0
    idx = np.zeros(n, dtype=np.int64)
    for i in range(n):
        idx[i] = i
    while True:
        for r in range(n):
            for c in range(n):
                M[r, c] = A[idx[r], c]
            rhs[r] = b[idx[r]]
        if _solve(M, rhs, n, x):
            feasK = True
            for p in range(nK):
                s = 0.0
                for c in range(n):
                    s += A[p, c] * x[c]
                if s > b[p] + TIGHT_TOL:
                    feasK = False
                    break
            if feasK:
                feasR = True
                for p in range(nK, m):
                    s = 0.0
                    for c in range(n):
                        s += A[p, c] * x[c]
                    if s > b[p] + TIGHT_TOL:
                        feasR = False
                        break
                pure = idx[n - 1] < nK
                if pure or feasR:
                    mask = np.int64(0)
                    for p in range(m):
                        s = 0.0
                        for c in range(n):
                            s += A[p, c] * x[c]
                        if abs(s - b[p]) <= TIGHT_TOL:
                            mask |= np.int64(1) << np.int64(p)
                    found = -1
                    for v in range(cnt):
                        d = 0.0
                        for c in range(n):
                            d = max(d, abs(V[v, c] - x[c]))
                        if d <= MERGE_TOL:
                            found = v
                            break
                    if found < 0:
                        for c in range(n):
                            V[cnt, c] = x[c]
                        masks[cnt] = mask
                        isK[cnt] = pure
                        inR[cnt] = feasR
                        cnt += 1
                    else:
                        masks[found] |= mask
                        isK[found] = isK[found] or pure
                        inR[found] = inR[found] or feasR
        # next n-combination of range(m)
        pos = n - 1
        while pos >= 0 and idx[pos] == m - n + pos:
            pos -= 1
        if pos < 0:
            break
        idx[pos] += 1
        for r in range(pos + 1, n):
            idx[r] = idx[r - 1] + 1
    return cnt


@njit
def _full_dimensional(V, sel, cnt, n):
    """Greedy width test: do the selected points span an n-dimensional hull?"""
    first = -1
    for v in range(cnt):
        if sel[v]:
            first = v
            break
    if first < 0:
        return False
    basis = np.zeros((n, n))
    found = 0
    for _ in range(n):
        best = 0.0
        bestv = np.zeros(n)
        for v in range(cnt):
            if not sel[v]:
                continue
            d = V[v] - V[first]
            for k in range(found):
                d = d - _dot(d, basis[k]) * basis[k]
            nd = math.sqrt(_dot(d, d))
            if nd > best:
                best = nd
                bestv = d / nd
        if best <= WIDTH_TOL:
            return False
        basis[found] = bestv
        found += 1
    return True


@njit
def _probe_pos(x, X, rhat, rbar, R, t, out, weight):
    """out[q] += weight · ⟨x,X_q⟩^{r̂} ⟨Rᵀ(x−t),X_q⟩^{r̄}."""
    n = x.shape[0]
    y = np.empty(n)
    if rbar > 0:
        for c in range(n):
            acc = 0.0
            for k in range(n):
                acc += R[k, c] * (x[k] - t[k])
            y[c] = acc
    for q in range(X.shape[0]):
        v = weight
        if rhat > 0:
            v *= _dot(x, X[q]) ** rhat
        if rbar > 0:
            v *= _dot(y, X[q]) ** rbar
        out[q] += v


@njit
def _simplex_measure(S, k):
    """k-volume of the simplex with vertex rows S[0..k]."""
    if k == 0:
        return 1.0
    n = S.shape[1]
    D = np.empty((k, n))
    for i in range(k):
        D[i] = S[i + 1] - S[0]
    if k == 1:
        return math.sqrt(_dot(D[0], D[0]))
    G = np.empty((k, k))
    for a in range(k):
        for c in range(k):
            G[a, c] = _dot(D[a], D[c])
    if k == 2:
        det = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
        return math.sqrt(max(det, 0.0)) / 2.0
    det = (G[0, 0] * (G[1, 1] * G[2, 2] - G[1, 2] * G[2, 1])
           - G[0, 1] * (G[1, 0] * G[2, 2] - G[1, 2] * G[2, 0])
           + G[0, 2] * (G[1, 0] * G[2, 1] - G[1, 1] * G[2, 0]))
    return math.sqrt(max(det, 0.0)) / 6.0


@njit
def _integrate_simplex(S, k, bary, bw, X, rhat, rbar, R, t, out, scale):
    vol = _simplex_measure(S, k)
    if vol <= 1e-14:
        return
    n = S.shape[1]
    x = np.empty(n)
    for node in range(bary.shape[0]):
        for c in range(n):
            acc = 0.0
            for v in range(k + 1):
                acc += bary[node, v] * S[v, c]
            x[c] = acc
        _probe_pos(x, X, rhat, rbar, R, t, out, scale * vol * bw[node])


@njit
def _ordered_polygon(V, pts, cnt, normal):
    """Indices of coplanar 3-D points sorted by angle around their centroid."""
    c = np.zeros(3)
    for i in range(cnt):
        c += V[pts[i]]
    c /= cnt
    e1 = V[pts[0]] - c
    e1 = e1 - _dot(e1, normal) * normal
    e1 /= math.sqrt(_dot(e1, e1))
    e2 = np.empty(3)
    e2[0] = normal[1] * e1[2] - normal[2] * e1[1]
    e2[1] = normal[2] * e1[0] - normal[0] * e1[2]
    e2[2] = normal[0] * e1[1] - normal[1] * e1[0]
    ang = np.empty(cnt)
    for i in range(cnt):
        d = V[pts[i]] - c
        ang[i] = math.atan2(_dot(d, e2), _dot(d, e1))
    order = np.argsort(ang)
    out = np.empty(cnt, dtype=np.int64)
    for i in range(cnt):
        out[i] = pts[order[i]]
    return out


@njit
def _segment_extremes(V, pts, cnt, direction):
    lo, hi = 0, 0
    vlo = _dot(V[pts[0]], direction)
    vhi = vlo
    for i in range(1, cnt):
        v = _dot(V[pts[i]], direction)
        if v < vlo:
            vlo, lo = v, i
        if v > vhi:
            vhi, hi = v, i
    return pts[lo], pts[hi]


@njit
def _arc_probe(a, bvec, s, X, out):
    """out[q] = ∫ ⟨u(θ),X_q⟩^s over the short arc from unit a to unit b."""
    dot = min(1.0, max(-1.0, _dot(a, bvec)))
    theta = math.acos(dot)
    w = bvec - dot * a
    nw = math.sqrt(_dot(w, w))
    if nw <= 1e-15:
        for q in range(X.shape[0]):
            out[q] = 0.0
        return
    w = w / nw
    tm = np.empty(s + 1)
    for k in range(s + 1):
        tm[k] = trig_moment(s - k, k, 0.0, theta)
    for q in range(X.shape[0]):
        A = _dot(a, X[q])
        B = _dot(w, X[q])
        acc = 0.0
        for k in range(s + 1):
            acc += _binom(s, k) * A ** (s - k) * B ** k * tm[k]
        out[q] = acc


@njit
def _extreme_normals(A, mask, nK):
    """Pair of tight K-normals with the smallest inner product."""
    ids = np.empty(nK, dtype=np.int64)
    cnt = 0
    for p in range(nK):
        if (mask >> np.int64(p)) & 1:
            ids[cnt] = p
            cnt += 1
    best = 2.0
    pa, pb = -1, -1
    for i in range(cnt):
        for k in range(i + 1, cnt):
            d = _dot(A[ids[i]], A[ids[k]])
            if d < best:
                best, pa, pb = d, ids[i], ids[k]
    return pa, pb


@njit
def _lowest_bits(mask, nK):
    first, second = -1, -1
    for p in range(nK):
        if (mask >> np.int64(p)) & 1:
            if first < 0:
                first = p
            else:
                second = p
                break
    return first, second


@njit
def _sample_value(A, b, nK, n, j, rhat, rbar, s, l, const, dir_const, X, R, t, dirs,
                  rule1, w1, rule2, w2, rule3, w3, V, masks, isK, inR, out):
    """Probe values of the integrand for one motion; returns False if K is negligible."""
    M = X.shape[0]
    for q in range(M):
        out[q] = 0.0
    m = A.shape[0]
    cnt = _enumerate_vertices(A, b, nK, n, V, masks, isK, inR)
    if not _full_dimensional(V, isK, cnt, n):
        return False
    pos = np.zeros(M)
    cone = np.empty(M)
    pts = np.empty(cnt, dtype=np.int64)
    S = np.empty((n + 1, n))
    Kmask = (np.int64(1) << np.int64(nK)) - 1

    if j == 0 and n == 2:
        for v in range(cnt):
            if not (isK[v] and inR[v]):
                continue
            pa, pb = _extreme_normals(A, masks[v] & Kmask, nK)
            if pa < 0:
                continue
            _arc_probe(A[pa], A[pb], s, X, cone)
            for q in range(M):
                pos[q] = 0.0
            _probe_pos(V[v], X, rhat, rbar, R, t, pos, 1.0)
            for q in range(M):
                out[q] += const * pos[q] * cone[q]
        return True

    if j == 0:
        # one random direction selects the K-vertex whose normal cone contains it
        for d in range(dirs.shape[0]):
            u = dirs[d]
            best = -1e300
            arg = -1
            for v in range(cnt):
                if isK[v]:
                    h = _dot(V[v], u)
                    if h > best:
                        best, arg = h, v
            if arg < 0 or not inR[arg]:
                continue
            for q in range(M):
                pos[q] = 0.0
            _probe_pos(V[arg], X, rhat, rbar, R, t, pos, 1.0)
            for q in range(M):
                out[q] += dir_const * pos[q] * _dot(u, X[q]) ** s
        return True

    if j == n - 1:
        for p in range(nK):
            dup = False
            for p2 in range(p):
                if np.abs(A[p] - A[p2]).max() <= MERGE_TOL and abs(b[p] - b[p2]) <= MERGE_TOL:
                    dup = True
            if dup:
                continue
            c = 0
            for v in range(cnt):
                if inR[v] and (masks[v] >> np.int64(p)) & 1:
                    pts[c] = v
                    c += 1
            if c < n:
                continue
            nrm = A[p]
            for q in range(M):
                pos[q] = 0.0
            if n == 2:
                e = np.array([-nrm[1], nrm[0]])
                va, vb = _segment_extremes(V, pts, c, e)
                S[0] = V[va]
                S[1] = V[vb]
                _integrate_simplex(S[:2], 1, rule1, w1, X, rhat, rbar, R, t, pos, 1.0)
                for q in range(M):
                    qf = _dot(e, X[q]) ** 2
                    out[q] += const * pos[q] * qf ** l * _dot(nrm, X[q]) ** s
            else:
                poly = _ordered_polygon(V, pts, c, nrm)
                for i in range(1, c - 1):
                    S[0] = V[poly[0]]
                    S[1] = V[poly[i]]
                    S[2] = V[poly[i + 1]]
                    _integrate_simplex(S[:3], 2, rule2, w2, X, rhat, rbar, R, t, pos, 1.0)
                for q in range(M):
                    qf = _dot(X[q], X[q]) - _dot(nrm, X[q]) ** 2
                    out[q] += const * pos[q] * qf ** l * _dot(nrm, X[q]) ** s
        return True

    if j == 1 and n == 3:
        for p in range(nK):
            for p2 in range(p + 1, nK):
                e = _cross(A[p], A[p2])
                ne = math.sqrt(_dot(e, e))
                if ne <= 1e-12:
                    continue
                e = e / ne
                c = 0
                common = Kmask
                for v in range(cnt):
                    if inR[v] and (masks[v] >> np.int64(p)) & 1 and (masks[v] >> np.int64(p2)) & 1:
                        pts[c] = v
                        c += 1
                        common &= masks[v]
                if c < 2:
                    continue
                # count each edge once: from the two lowest tight planes
                f1, f2 = _lowest_bits(common, nK)
                if f1 != p or f2 != p2:
                    continue
                va, vb = _segment_extremes(V, pts, c, e)
                if np.abs(V[va] - V[vb]).max() <= MERGE_TOL:
                    continue
                pa, pb = _extreme_normals(A, common, nK)
                _arc_probe(A[pa], A[pb], s, X, cone)
                for q in range(M):
                    pos[q] = 0.0
                S[0] = V[va]
                S[1] = V[vb]
                _integrate_simplex(S[:2], 1, rule1, w1, X, rhat, rbar, R, t, pos, 1.0)
                for q in range(M):
                    out[q] += const * pos[q] * (_dot(e, X[q]) ** 2) ** l * cone[q]
        return True

    # j == n: integrate over K ∩ R by pyramids from an interior point
    nl = 0
    centre = np.zeros(n)
    for v in range(cnt):
        if inR[v]:
            centre += V[v]
            nl += 1
    if nl < n + 1 or not _full_dimensional(V, inR, cnt, n):
        return True
    centre /= nl
    for q in range(M):
        pos[q] = 0.0
    for p in range(m):
        dup = False
        for p2 in range(p):
            if np.abs(A[p] - A[p2]).max() <= MERGE_TOL and abs(b[p] - b[p2]) <= MERGE_TOL:
                dup = True
        if dup:
            continue
        c = 0
        for v in range(cnt):
            if inR[v] and (masks[v] >> np.int64(p)) & 1:
                pts[c] = v
                c += 1
        if c < n:
            continue
        S[0] = centre
        if n == 2:
            e = np.array([-A[p, 1], A[p, 0]])
            va, vb = _segment_extremes(V, pts, c, e)
            S[1] = V[va]
            S[2] = V[vb]
            _integrate_simplex(S[:3], 2, rule2, w2, X, rhat, rbar, R, t, pos, 1.0)
        else:
            poly = _ordered_polygon(V, pts, c, A[p])
            for i in range(1, c - 1):
                S[1] = V[poly[0]]
                S[2] = V[poly[i]]
                S[3] = V[poly[i + 1]]
                _integrate_simplex(S, 3, rule3, w3, X, rhat, rbar, R, t, pos, 1.0)
    for q in range(M):
        out[q] = const * pos[q] * _dot(X[q], X[q]) ** l
    return True


@njit
def _place_planes(A0, b0, moving, R, t, A, b):
    n = A0.shape[1]
    for p in range(A0.shape[0]):
        if moving[p]:
            for c in range(n):
                acc = 0.0
                for k in range(n):
                    acc += R[c, k] * A0[p, k]
                A[p, c] = acc
            b[p] = b0[p] + _dot(A[p], t)
        else:
            A[p] = A0[p]
            b[p] = b0[p]


@njit
def kinematic_batch(A0, b0, moving, nK, PV, PpV, rots, us, dirs, j, rhat, rbar, s, l, const,
                    dir_const, X, rule1, w1, rule2, w2, rule3, w3):
    """Per-sample probe values (B × M), already multiplied by the window volume.

    ``moving`` flags the planes of P' and β' that follow the motion
    x ↦ ϑx + t; the first ``nK`` planes bound K, the rest bound R.
    """
    B = rots.shape[0]
    n = A0.shape[1]
    m = A0.shape[0]
    M = X.shape[0]
    vals = np.zeros((B, M))
    A = np.empty((m, n))
    b = np.empty(m)
    max_v = 1
    for k in range(n):
        max_v = max_v * (m - k) // (k + 1)
    V = np.empty((max_v, n))
    masks = np.zeros(max_v, dtype=np.int64)
    isK = np.zeros(max_v, dtype=np.bool_)
    inR = np.zeros(max_v, dtype=np.bool_)
    out = np.empty(M)
    lo = np.empty(n)
    hi = np.empty(n)
    t = np.empty(n)
    for smp in range(B):
        R = rots[smp]
        # bounding box of P ⊕ (−ϑP'), which contains every hitting translation
        for c in range(n):
            qmin = 1e300
            qmax = -1e300
            for v in range(PpV.shape[0]):
                y = 0.0
                for k in range(n):
                    y += R[c, k] * PpV[v, k]
                qmin = min(qmin, y)
                qmax = max(qmax, y)
            lo[c] = PV[:, c].min() - qmax
            hi[c] = PV[:, c].max() - qmin
        vol = 1.0
        for c in range(n):
            t[c] = lo[c] + (hi[c] - lo[c]) * us[smp, c]
            vol *= hi[c] - lo[c]
        _place_planes(A0, b0, moving, R, t, A, b)
        if _sample_value(A, b, nK, n, j, rhat, rbar, s, l, const, dir_const, X, R, t, dirs[smp],
                         rule1, w1, rule2, w2, rule3, w3, V, masks, isK, inR, out):
            for q in range(M):
                vals[smp, q] = vol * out[q]
    return vals
