"""Acceptance criteria 1-8, one PASS/FAIL line each.

Tolerances are the fixed ones of the criteria; every Monte Carlo check uses
the seed equal to its criterion number.  Run alone with

    pytest tests/test_acceptance.py -v
"""

import math
import time

import numpy as np

from tensorkin import exactnum as ex
from tensorkin.harness import lemmas
from tensorkin.harness.lhs import verify_kinematic
from tensorkin.harness.report import power_self_test
from tensorkin.harness.steiner import verify_local_steiner
from tensorkin.kinematic import KinematicQuery, coefficient_consistency_report, rhs_special, rhs_theorem_main
from tensorkin.measures import MeasureSpec, covariance_and_valuation_checks
from tensorkin.polytope import RegionSpec, SphereRegion, catalog, transform
from tensorkin.subspaces import RngStream, Subspace, haar_rotations, sphere_points
from tensorkin.symtensor import max_abs_diff

SQUARE = catalog("cube", dim=2)
TRIANGLE = catalog("simplex", dim=2)
CUBE = catalog("cube", dim=3)
TETRA = catalog("simplex", dim=3)
BUDGET = {2: 1_000_000, 3: 200_000}
LEMMA_SAMPLES = 1_000_000


def test_criterion_1_exact_identities(acceptance_log):
    t0 = time.perf_counter()
    counts = {}
    ok = True
    for suite, kwargs in (("A1", dict(max_q=12)), ("A2", dict(max_s_a2=8)), ("legendre", dict(max_2c=24))):
        rep = ex.identity_suite(suite, **kwargs)
        counts[suite] = len(rep.results)
        ok &= rep.passed and len(rep.results) > 0
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120
    acceptance_log(1, ok, f"identities {counts} all exact, {elapsed:.1f}s (< 120s)")
    assert ok


def test_criterion_2_coefficient_pipeline(acceptance_log):
    t0 = time.perf_counter()
    rep = coefficient_consistency_report(max_n=6, max_s=6, max_l=4)
    elapsed = time.perf_counter() - t0
    ok = rep.passed and all(v > 0 for v in rep.checks.values()) and elapsed < 300
    acceptance_log(2, ok, f"checks {rep.checks}, failures {len(rep.failures)}, {elapsed:.1f}s (< 300s)")
    assert ok, rep.failures[:5]


def test_criterion_3_principal_kinematic_formula(acceptance_log):
    rep = verify_kinematic(KinematicQuery(SQUARE, SQUARE, 0), BUDGET[2], seed=3)
    ok = rep.passed and math.isclose(float(rep.exact), 2 + 8 / math.pi, rel_tol=1e-14) and rep.wall_time_s < 180
    acceptance_log(3, ok, f"estimate {float(rep.estimate):.5f} ± {float(rep.stderr):.5f} vs "
                          f"{float(rep.exact):.5f}, z {rep.z_max:.2f}, {rep.wall_time_s:.1f}s")
    assert ok


def _criterion_4_queries():
    half = RegionSpec.halfspace([1.0, 0.0], 0.5)
    out = []
    for beta, tag in ((RegionSpec.all(), "a"), (half, "b")):
        for s in (1, 2):
            for r in (0, 1):
                out.append((tag, KinematicQuery(SQUARE, TRIANGLE, 0, r, s, 0, beta=beta)))
    for j in (0, 1):
        for s in (0, 1, 2):
            for l in ((0,) if j == 0 else (0, 1)):
                out.append(("c", KinematicQuery(CUBE, TETRA, j, 0, s, l)))
    return out


def test_criterion_4_tensor_cases(acceptance_log):
    t0 = time.perf_counter()
    worst = {}
    failed = []
    for tag, q in _criterion_4_queries():
        rep = verify_kinematic(q, BUDGET[q.n], seed=4)
        worst[tag] = max(worst.get(tag, 0.0), rep.z_max)
        if not rep.passed:
            failed.append((tag, q.j, q.r, q.s, q.l, rep.z_max))
    elapsed = time.perf_counter() - t0
    ok = not failed and elapsed < 1800
    z = ", ".join(f"({k}) z_max {v:.2f}" for k, v in sorted(worst.items()))
    acceptance_log(4, ok, f"{len(_criterion_4_queries())} queries: {z}; failures {failed}; {elapsed:.0f}s")
    assert ok


def test_criterion_5_lemma_verifiers(acceptance_log):
    t0 = time.perf_counter()
    failed = []
    z_all = []
    for lemma_id in lemmas.LEMMA_IDS:
        cases = lemmas.DEFAULT_CASES[lemma_id]
        assert len(cases) >= 2
        for params in cases:
            rep = lemmas.verify_lemma(lemma_id, params, LEMMA_SAMPLES, seed=5)
            power = power_self_test(rep)
            z_all.append(rep.z_max)
            if not (rep.passed and rep.extra.get("sides_pass", True) and power["rejected"]):
                failed.append((lemma_id, params, rep.z_max, power["rejected"]))
    # P49 at l = 0 is the a = 2 instance of L45 with k' = n-k+j, r = k, i = m
    cross = []
    for n, k, j, m in ((3, 2, 1, 1), (4, 3, 1, 1), (4, 2, 1, 2), (5, 3, 2, 1)):
        F = Subspace(n, lemmas.fixture_frame("P49", n)[:k])
        cross.append(max_abs_diff(lemmas.p49_exact(n, k, j, m, 0, F),
                                  lemmas.l45_exact(n, n - k + j, k, 2, m, F)))
    elapsed = time.perf_counter() - t0
    ok = not failed and max(cross) < 1e-13 and elapsed < 1200
    acceptance_log(5, ok, f"{len(z_all)} cases at N=1e6, z_max {max(z_all):.2f}, all power tests reject: "
                          f"{not failed}; P49/L45 cross-check diff {max(cross):.1e}; {elapsed:.0f}s")
    assert ok, failed


def test_criterion_6_local_steiner(acceptance_log):
    square = verify_local_steiner(SQUARE, eps_list=(0.1, 0.5), samples=1_000_000, seed=6)
    exact_ok = all(math.isclose(r.exact, 4 * r.epsilon + math.pi * r.epsilon**2, rel_tol=1e-12)
                   for r in square.rows)
    beta = RegionSpec.box([-1.0, -1.0], [0.3, 0.3])
    omega = SphereRegion.cap(np.array([-1.0, -1.0]) / math.sqrt(2), 0.5)
    local = verify_local_steiner(SQUARE, beta, omega, eps_list=(0.1, 0.5), samples=1_000_000, seed=6)
    ok = square.passed and exact_ok and local.passed
    acceptance_log(6, ok, f"square z_max {square.z_max:.2f}; vertex box x cap z_max {local.z_max:.2f} "
                          f"(Λ = {[round(c['lambda'], 5) for c in local.coefficients]})")
    assert ok


def _random_hyperplane(P, rng):
    a = sphere_points(rng, P.n, 1)[0]
    c = P.vertices.mean(axis=0)
    h = P.vertices @ a
    b = float(c @ a) + 0.3 * float(rng.uniform((1,))[0] - 0.5) * (h.max() - h.min())
    return a, b


def _criterion_7_specs(n, rng):
    specs = []
    for j in range(n + 1):
        for r in range(3):
            for s in ((0,) if j == n else (0, 1, 2)):
                for l in ((0,) if j == 0 else (0, 1)):
                    if n == 3 and (s + l > 2):
                        continue
                    a = sphere_points(rng, n, 1)[0]
                    beta = RegionSpec.halfspace(a, 0.3) if (j + r + s) % 2 else RegionSpec.all()
                    specs.append(MeasureSpec(j, r, s, l, beta))
    return specs


def test_criterion_7_structural_properties(acceptance_log):
    rng = RngStream(7, "structure")
    worst = {}
    count = 0
    for P in (SQUARE, catalog("box", [0.0, 0.0, 0.0], [1.0, 1.5, 0.7])):
        rotations = haar_rotations(rng.substream(f"rot{P.n}"), P.n, 10)
        for idx, spec in enumerate(_criterion_7_specs(P.n, rng.substream(f"spec{P.n}"))):
            t = rng.substream(f"t{P.n}.{idx}").normal((P.n,))
            cut = _random_hyperplane(P, rng.substream(f"cut{P.n}.{idx}"))
            entries = covariance_and_valuation_checks(P, spec, R=rotations[0], t=t, hyperplane=cut,
                                                      lams=(0.5, 2.0), tol=1e-8)
            for R in rotations[1:]:
                entries += covariance_and_valuation_checks(P, spec, R=R, lams=(), tol=1e-8)
            for e in entries:
                key = e.name.split("(")[0]
                worst[key] = max(worst.get(key, 0.0), e.diff)
                count += 1
    ok = all(v <= 1e-8 for v in worst.values())
    acceptance_log(7, ok, f"{count} checks, max diff " + ", ".join(f"{k} {v:.1e}" for k, v in sorted(worst.items()))
                   + " (tol 1e-8)")
    assert ok


def _criterion_8_queries():
    rng = np.random.default_rng(8)
    bodies = {2: [SQUARE, TRIANGLE, catalog("ngon", 5, 1.0)], 3: [CUBE, TETRA, catalog("crosspoly", dim=3)]}
    out = []
    for idx in range(20):
        n = 2 if idx % 3 else 3
        P, Pp = (bodies[n][i] for i in rng.integers(0, 3, size=2))
        R = haar_rotations(RngStream(8, f"query{idx}"), n, 1)[0]
        Pp = transform(Pp, R, rng.normal(size=n) * 0.3)
        l = idx % 2
        j = int(rng.integers(l, n))
        s = int(rng.integers(0, 5 if n == 2 else 3))
        r = int(rng.integers(0, 3))
        a = rng.normal(size=n)
        beta = RegionSpec.halfspace(a / np.linalg.norm(a), float(rng.uniform(0.0, 0.6))) if idx % 4 < 2 \
            else RegionSpec.all()
        out.append(KinematicQuery(P, Pp, j, r, s, l, beta=beta))
    return out


def test_criterion_8_specialization_consistency(acceptance_log):
    diffs = []
    for q in _criterion_8_queries():
        diffs.append(max_abs_diff(rhs_special(q, "l0" if q.l == 0 else "l1"), rhs_theorem_main(q)))
    ok = max(diffs) <= 1e-10
    acceptance_log(8, ok, f"20 queries (l0: {sum(q.l == 0 for q in _criterion_8_queries())}, "
                          f"l1: {sum(q.l == 1 for q in _criterion_8_queries())}), max diff {max(diffs):.1e} (tol 1e-10)")
    assert ok
