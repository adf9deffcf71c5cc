"""Verification reports, streaming moments and the z-score gate."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..symtensor import SymTensor, monomials

Z_GATE = 4.0
SE_FLOOR = 1e-12
ZERO_EXACT = 1e-12
# for exact zeros, z ≤ 4 must mean |est| ≤ max(4·SE, 1e-9)
ZERO_FLOOR = 1e-9 / Z_GATE


@dataclass
class RunningMoments:
    """Per-coordinate count, mean and centred sum of squares (Chan et al. merge)."""

    dim: int
    count: int = 0
    mean: np.ndarray = None
    m2: np.ndarray = None

    def __post_init__(self):
        if self.mean is None:
            self.mean = np.zeros(self.dim)
            self.m2 = np.zeros(self.dim)

    @classmethod
    def from_samples(cls, values: np.ndarray) -> "RunningMoments":
        values = np.asarray(values, dtype=float)
        if values.shape[0] == 0:
            return cls(values.shape[1])
        mean = values.mean(axis=0)
        return cls(values.shape[1], values.shape[0], mean, ((values - mean) ** 2).sum(axis=0))

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        if other.count == 0:
            return self
        if self.count == 0:
            return RunningMoments(self.dim, other.count, other.mean.copy(), other.m2.copy())
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + delta**2 * (self.count * other.count / n)
        return RunningMoments(self.dim, n, mean, m2)

    def stderr(self) -> np.ndarray:
        if self.count < 2:
            return np.full(self.dim, math.inf)
        return np.sqrt(self.m2 / (self.count - 1) / self.count)


def z_scores(est: np.ndarray, se: np.ndarray, exact: np.ndarray) -> np.ndarray:
    floor = np.where(np.abs(exact) <= ZERO_EXACT, ZERO_FLOOR, SE_FLOOR)
    return np.abs(est - exact) / np.maximum(se, floor)


@dataclass
class VerificationReport:
    kind: str
    estimate: SymTensor
    stderr: SymTensor
    exact: SymTensor
    samples: int
    seed: int
    query: dict = field(default_factory=dict)
    wall_time_s: float | None = None
    extra: dict = field(default_factory=dict)

    def vectors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.estimate.to_vector(), self.stderr.to_vector(), self.exact.to_vector()

    @property
    def z(self) -> np.ndarray:
        return z_scores(*self.vectors())

    @property
    def z_max(self) -> float:
        z = self.z
        return float(z.max()) if z.size else 0.0

    @property
    def passed(self) -> bool:
        return self.z_max <= Z_GATE

    def with_exact(self, exact: SymTensor) -> "VerificationReport":
        return VerificationReport(self.kind, self.estimate, self.stderr, exact, self.samples,
                                  self.seed, self.query, self.wall_time_s, dict(self.extra))

    def coordinates(self) -> list[dict]:
        est, se, ex = self.vectors()
        z = self.z
        mons = monomials(self.estimate.dim, self.estimate.rank)
        return [{"index": list(e), "estimate": float(est[i]), "stderr": float(se[i]),
                 "exact": float(ex[i]), "z": float(z[i])} for i, e in enumerate(mons)]

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "query": self.query,
            "estimate": self.estimate.to_json(),
            "stderr": self.stderr.to_json(),
            "exact": self.exact.to_json(),
            "coordinates": self.coordinates(),
            "z_max": self.z_max,
            "pass": self.passed,
            "samples": self.samples,
            "seed": self.seed,
            "wall_time_s": self.wall_time_s,
        }
        out.update(self.extra)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def power_self_test(report: VerificationReport, factor: float = 10.0) -> dict:
    """Shift the target on the coordinate with the largest SE by factor·SE and re-gate.

    A gate with statistical power must reject the shifted target.  The shift
    is at least factor·1e-9 so that coordinates with zero SE are also probed.
    """
    est, se, exact = report.vectors()
    k = int(np.argmax(se))
    shift = factor * max(float(se[k]), 1e-9)
    shifted = exact.copy()
    shifted[k] += shift
    z = z_scores(est, se, shifted)
    return {"coordinate": k, "shift": shift, "z_max_shifted": float(z.max()),
            "rejected": bool(z.max() > Z_GATE)}
