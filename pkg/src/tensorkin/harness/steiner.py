"""Monte Carlo check of the local Steiner polynomial of a polytope."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

from .. import exactnum as ex
from ..measures import MeasureError, local_parallel_volume_mc, support_measure
from ..polytope import Polytope, RegionSpec, SphereRegion
from ..subspaces import RngStream
from .report import SE_FLOOR, Z_GATE


@dataclass
class SteinerRow:
    epsilon: float
    estimate: float
    stderr: float
    exact: float
    exact_stderr: float = 0.0

    @property
    def z(self) -> float:
        return abs(self.estimate - self.exact) / max(math.hypot(self.stderr, self.exact_stderr), SE_FLOOR)

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "estimate": self.estimate, "stderr": self.stderr,
                "exact": self.exact, "exact_stderr": self.exact_stderr, "z": self.z,
                "pass": self.z <= Z_GATE}


@dataclass
class SteinerReport:
    rows: list[SteinerRow]
    differences: list[dict]
    coefficients: list[dict]
    samples: int
    seed: int
    query: dict = field(default_factory=dict)
    wall_time_s: float | None = None

    @property
    def z_max(self) -> float:
        zs = [r.z for r in self.rows] + [d["z"] for d in self.differences]
        return max(zs) if zs else 0.0

    @property
    def passed(self) -> bool:
        return self.z_max <= Z_GATE

    def to_json(self) -> dict:
        return {"kind": "steiner", "query": self.query, "rows": [r.to_json() for r in self.rows],
                "differences": self.differences, "coefficients": self.coefficients,
                "z_max": self.z_max, "pass": self.passed, "samples": self.samples,
                "seed": self.seed, "wall_time_s": self.wall_time_s,
                "substreams": ["steiner/lambda<j>", "steiner/eps<index>"]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def support_measures(P: Polytope, beta: RegionSpec, omega: SphereRegion, seed: int,
                     samples: int = 200_000) -> list[tuple[float, float, str]]:
    """(Λ_j, SE, method) for j < n; the SE is nonzero only when a cone moment needs MC."""
    out = []
    for j in range(P.n):
        res = support_measure(P, j, beta, omega, rng=RngStream(seed, f"steiner/lambda{j}"),
                              samples=samples)
        out.append((float(res.tensor.to_vector()[0]), float(res.stderr.to_vector()[0]), res.method))
    return out


def verify_local_steiner(P: Polytope, beta: RegionSpec | None = None, omega: SphereRegion | None = None,
                         eps_list=(0.1, 0.5), samples: int = 1_000_000, seed: int = 0,
                         timing: bool = True) -> SteinerReport:
    """Compare the MC volume of the local parallel set with Σ_j κ_{n-j} Λ_j ε^{n-j} for each ε.

    Each ε gets its own substream, so the estimates are independent and the
    difference check between consecutive ε uses the root-sum-square SE.
    """
    t0 = time.perf_counter()
    beta = beta or RegionSpec.all()
    omega = omega or SphereRegion.all()
    eps_list = [float(e) for e in eps_list]
    if not eps_list or min(eps_list) <= 0:
        raise MeasureError("need a nonempty list of positive ε")
    n = P.n
    lams = support_measures(P, beta, omega, seed)
    kap = [float(ex.kappa(n - j)) for j in range(n)]
    rows = []
    for idx, eps in enumerate(eps_list):
        est, se = local_parallel_volume_mc(P, beta, omega, eps, RngStream(seed, f"steiner/eps{idx}"), samples)
        exact = math.fsum(kap[j] * lams[j][0] * eps ** (n - j) for j in range(n))
        exact_se = math.sqrt(math.fsum((kap[j] * lams[j][1] * eps ** (n - j)) ** 2 for j in range(n)))
        rows.append(SteinerRow(eps, est, se, exact, exact_se))
    diffs = []
    for a, b in zip(rows, rows[1:]):
        # the Λ_j errors are shared by both rows and enter through ε_b^{n-j} - ε_a^{n-j}
        d_est, d_exact = b.estimate - a.estimate, b.exact - a.exact
        lam_se = math.sqrt(math.fsum(
            (kap[j] * lams[j][1] * (b.epsilon ** (n - j) - a.epsilon ** (n - j))) ** 2 for j in range(n)))
        d_se = math.sqrt(a.stderr**2 + b.stderr**2 + lam_se**2)
        z = abs(d_est - d_exact) / max(d_se, SE_FLOOR)
        diffs.append({"epsilons": [a.epsilon, b.epsilon], "estimate": d_est, "exact": d_exact,
                      "stderr": d_se, "z": z, "pass": z <= Z_GATE})
    coeffs = [{"j": j, "lambda": lams[j][0], "stderr": lams[j][1], "method": lams[j][2]} for j in range(n)]
    query = {"P": P.to_json(), "beta": beta.to_json(), "omega": omega.to_json(), "epsilons": eps_list}
    return SteinerReport(rows, diffs, coeffs, samples, seed, query,
                         time.perf_counter() - t0 if timing else None)
