"""Throughput of the kinematic sampling kernel with and without numba.

Each backend runs in its own subprocess because the backend is fixed at import
time by TENSORKIN_DISABLE_NUMBA.  A short warm-up run absorbs JIT compilation
before the timed run.

    python3 benchmarks/bench_kernels.py [--samples 20000] [--dim 2]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
from tensorkin.harness._jit import BACKEND
from tensorkin.harness.lhs import lhs_mc_estimate
from tensorkin.kinematic import KinematicQuery
from tensorkin.polytope import catalog

dim, samples = int(sys.argv[1]), int(sys.argv[2])
q = KinematicQuery(catalog("cube", 1.0, dim=dim), catalog("simplex", dim=dim), j=0, s=2)
lhs_mc_estimate(q, 200, seed=1)
t0 = time.perf_counter()
est = lhs_mc_estimate(q, samples, seed=2)
dt = time.perf_counter() - t0
print(json.dumps({"backend": BACKEND, "samples": samples, "seconds": dt,
                  "samples_per_s": samples / dt, "estimate": est.estimate.to_json()}))
"""


def run(disable: bool, dim: int, samples: int) -> dict:
    env = dict(os.environ)
    env.pop("TENSORKIN_DISABLE_NUMBA", None)
    if disable:
        env["TENSORKIN_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKER, str(dim), str(samples)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--dim", type=int, choices=(2, 3), default=2)
    args = ap.parse_args(argv)
    jit = run(False, args.dim, args.samples)
    py = run(True, args.dim, args.samples)
    same = jit["estimate"] == py["estimate"]
    print(json.dumps({"dim": args.dim, "numba": jit, "python": py,
                      "speedup": jit["samples_per_s"] / py["samples_per_s"],
                      "identical_estimates": same}, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
