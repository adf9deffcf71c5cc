"""Monte Carlo left-hand sides of the kinematic formula and its weighted version.

The motion measure is Haar probability on SO(n) times Lebesgue measure on
R^n.  Each sample draws ϑ, then t uniformly in the bounding box of
P ⊕ (−ϑP'); the integrand is multiplied by the box volume.  Motions whose
intersection is empty or lower-dimensional contribute zero.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import exactnum as ex
from ..kinematic import KinematicQuery, rhs_theorem_main, rhs_weighted
from ..measures import MeasureError
from ..quadrature import simplex_rule
from ..subspaces import RngStream, haar_rotations, sphere_points
from ..symtensor import SymTensor, probe_basis
from ._kernels import kinematic_batch
from .report import RunningMoments, VerificationReport

DEFAULT_BATCH = 50_000
DIRECTIONS_PER_SAMPLE = 4
SUBSTREAMS = {"batch": "kin/<batch>", "purposes": ["rotation", "translation", "direction"]}


@dataclass(frozen=True)
class KernelSetup:
    A: np.ndarray
    b: np.ndarray
    moving: np.ndarray
    nK: int
    PV: np.ndarray
    PpV: np.ndarray
    rank: int
    const: float
    dir_const: float
    X: np.ndarray
    W: np.ndarray
    rules: tuple


def _setup(q: KinematicQuery, r_hat: int, r_bar: int, directions: int) -> KernelSetup:
    n = q.n
    if n not in (2, 3):
        raise MeasureError("the kinematic sampler supports n = 2 and n = 3")
    if q.betap.kind == "box":
        raise MeasureError("β' must be ALL or a halfspace: boxes are not closed under rotation")
    Ab, bb = q.beta.halfspaces(n)
    Abp, bbp = q.betap.halfspaces(n)
    A = np.vstack([q.P.normals, q.Pp.normals, Ab, Abp])
    b = np.concatenate([q.P.offsets, q.Pp.offsets, bb, bbp])
    if A.shape[0] > 62:
        raise MeasureError("too many halfspaces for the tight-plane bitmask")
    mP, mQ = len(q.P.offsets), len(q.Pp.offsets)
    moving = np.zeros(A.shape[0], dtype=bool)
    moving[mP:mP + mQ] = True
    moving[mP + mQ + len(bb):] = True
    j, s, l = q.j, q.s, q.l
    c = float(ex.c_normalizing(n, j, r_hat, s, l)) / math.factorial(r_bar)
    const = c if j == n else c / float(ex.omega(n - j))
    dir_const = c / directions  # ω_n / ω_n: sphere area cancels the normalization
    rank = r_hat + r_bar + s + 2 * l
    X, W = probe_basis(n, rank)
    q_nodes = (r_hat + r_bar) // 2 + 2
    rules = tuple(np.ascontiguousarray(a) for k in (1, 2, 3) for a in simplex_rule(k, q_nodes))
    return KernelSetup(np.ascontiguousarray(A), np.ascontiguousarray(b), moving, mP + mQ,
                       np.ascontiguousarray(q.P.vertices), np.ascontiguousarray(q.Pp.vertices),
                       rank, const, dir_const, np.ascontiguousarray(X), W, rules)


def batch_sizes(samples: int, batches: int | None) -> list[int]:
    if samples < 1:
        raise ValueError("need at least one sample")
    if batches is None:
        batches = max(1, math.ceil(samples / DEFAULT_BATCH))
    batches = max(1, min(int(batches), samples))
    base, extra = divmod(samples, batches)
    return [base + (b < extra) for b in range(batches)]


def _run_batch(q: KinematicQuery, setup: KernelSetup, seed: int, b: int, size: int,
               r_hat: int, r_bar: int, directions: int) -> RunningMoments:
    rng = RngStream(seed, f"kin/{b}")
    n = q.n
    rots = haar_rotations(rng.substream("rotation"), n, size)
    us = rng.substream("translation").uniform((size, n))
    if q.j == 0 and n == 3:
        dirs = sphere_points(rng.substream("direction"), n, size * directions).reshape(size, directions, n)
    else:
        dirs = np.zeros((size, 0, n))
    vals = kinematic_batch(setup.A, setup.b, setup.moving, setup.nK, setup.PV, setup.PpV,
                           np.ascontiguousarray(rots), np.ascontiguousarray(us),
                           np.ascontiguousarray(dirs), q.j, r_hat, r_bar, q.s, q.l, setup.const,
                           setup.dir_const, setup.X, *setup.rules)
    return RunningMoments.from_samples(vals @ setup.W.T)


@dataclass(frozen=True)
class LhsEstimate:
    estimate: SymTensor
    stderr: SymTensor
    samples: int


def lhs_mc_estimate(q: KinematicQuery, samples: int, seed: int, batches: int | None = None,
                    workers: int = 1, r_hat: int | None = None, r_bar: int = 0,
                    directions: int = DIRECTIONS_PER_SAMPLE) -> LhsEstimate:
    """Mean and per-coordinate SE of the weighted kinematic integrand.

    With the defaults the integrand is φ_j^{r,s,l}(P ∩ gP', β ∩ gβ').  Passing
    ``r_hat``/``r_bar`` replaces x^r by the weights x^{r̂}/r̂! and y^{r̄}/r̄!,
    with y the preimage of x in the frame of P'.
    """
    if r_hat is None:
        r_hat = q.r
    setup = _setup(q, r_hat, r_bar, directions)
    sizes = batch_sizes(samples, batches)

    def job(b):
        return _run_batch(q, setup, seed, b, sizes[b], r_hat, r_bar, directions)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(b) for b in range(len(sizes))]
    total = RunningMoments(len(setup.X))
    for part in parts:  # fixed order regardless of completion order
        total = total.merge(part)
    n = q.n
    return LhsEstimate(SymTensor.from_vector(n, setup.rank, total.mean),
                       SymTensor.from_vector(n, setup.rank, total.stderr()), total.count)


def verify_kinematic(q: KinematicQuery, samples: int, seed: int, batches: int | None = None,
                     workers: int = 1, timing: bool = True) -> VerificationReport:
    t0 = time.perf_counter()
    est = lhs_mc_estimate(q, samples, seed, batches, workers)
    exact = rhs_theorem_main(q)
    return VerificationReport("kinematic", est.estimate, est.stderr, exact, est.samples, seed,
                              q.to_json(), time.perf_counter() - t0 if timing else None,
                              {"substreams": SUBSTREAMS})


def verify_weighted(q: KinematicQuery, r_hat: int, r_bar: int, samples: int, seed: int,
                    batches: int | None = None, workers: int = 1, timing: bool = True) -> VerificationReport:
    t0 = time.perf_counter()
    exact = rhs_weighted(q, r_hat, r_bar)
    est = lhs_mc_estimate(q, samples, seed, batches, workers, r_hat=r_hat, r_bar=r_bar)
    query = dict(q.to_json(), r_hat=r_hat, r_bar=r_bar)
    return VerificationReport("weighted", est.estimate, est.stderr, exact, est.samples, seed,
                              query, time.perf_counter() - t0 if timing else None,
                              {"substreams": SUBSTREAMS})
