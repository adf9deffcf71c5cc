"""Command line entry point: ``tensorkin <subcommand> [flags]``.

Every subcommand writes one JSON document to standard output.  Exit status is
0 on success, 1 when a verification gate fails and 2 on usage or domain errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .. import exactnum as ex
from ..kinematic import KinematicQuery, rhs_special_terms, rhs_theorem_main_terms
from ..measures import MeasureError, MeasureSpec, local_minkowski
from ..polytope import GeometryError, Polytope, parse_polytope, parse_region, parse_sphere_region
from ..subspaces import RngStream
from . import lemmas
from .report import power_self_test

USAGE_ERRORS = (MeasureError, GeometryError, ex.DomainError, lemmas.LemmaError, ValueError)
DEFAULT_SAMPLES = {2: 1_000_000, 3: 200_000}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _seed(text: str) -> int:
    v = int(text, 10)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a decimal integer in [0, 2^64)")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _load_polytope(text: str, dim: int) -> Polytope:
    """A catalog spec such as ``cube:1.0`` or the path of a polytope JSON file."""
    if text.endswith(".json") or os.path.isfile(text):
        with open(text) as fh:
            return Polytope.from_json(json.load(fh))
    return parse_polytope(text, dim=dim)


def _add_indices(p, *names):
    for name in names:
        p.add_argument(f"--{name}", type=int, default=0)


def _add_mc(p, samples_default=None):
    p.add_argument("--samples", type=_positive, default=samples_default)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--json-out", metavar="PATH")
    p.add_argument("--no-timing", action="store_true",
                   help="report wall_time_s as null so output bytes are reproducible")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tensorkin", description="Tensorial curvature measures and kinematic formulas")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("measure", help="evaluate φ_j^{r,s,l}(P, β × ω)")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--polytope")
    src.add_argument("--polytope-file")
    p.add_argument("--dim", type=int, default=2)
    _add_indices(p, "j", "r", "s", "l")
    p.add_argument("--beta", default="all")
    p.add_argument("--omega", default="all")
    p.add_argument("--mc-n", type=_positive, default=200_000)
    p.add_argument("--seed", type=_seed, default=0)

    def query_flags(p):
        p.add_argument("--P", required=True, help="catalog spec or polytope JSON file")
        p.add_argument("--Pp", required=True, help="moving body, same forms as --P")
        p.add_argument("--dim", type=int, default=2)
        _add_indices(p, "j", "r", "s", "l")
        p.add_argument("--beta", default="all")
        p.add_argument("--betap", default="all")

    p = sub.add_parser("rhs", help="exact right-hand side with its term breakdown")
    query_flags(p)
    p.add_argument("--variant", choices=("main", "l0", "l1"), default="main")

    for name in ("verify-kinematic", "verify-weighted"):
        p = sub.add_parser(name, help="Monte Carlo left side against the exact right side")
        query_flags(p)
        if name == "verify-weighted":
            p.add_argument("--r-hat", type=int, default=0)
            p.add_argument("--r-bar", type=int, default=0)
        _add_mc(p)
        p.add_argument("--batches", type=_positive)
        p.add_argument("--workers", type=_positive, default=1)

    p = sub.add_parser("lemma", help="Monte Carlo check of one integral formula")
    p.add_argument("--id", required=True, choices=lemmas.LEMMA_IDS)
    for name in ("n", "k", "j", "r", "a", "i", "l", "m", "s", "t"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--case", type=int, help="index into the built-in parameter sets")
    _add_mc(p, lemmas.DEFAULT_LEMMA_SAMPLES)

    p = sub.add_parser("steiner", help="local parallel volume against the local Steiner polynomial")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--polytope")
    src.add_argument("--polytope-file")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--beta", default="all")
    p.add_argument("--omega", default="all")
    p.add_argument("--eps", type=float, nargs="+", default=[0.1, 0.5])
    _add_mc(p, 1_000_000)

    p = sub.add_parser("identities", help="exact Gamma and coefficient identities")
    p.add_argument("--suite", choices=("all",) + ex.identities.SUITES, default="all")
    p.add_argument("--max-q", type=int, default=12)

    p = sub.add_parser("coeff", help="one kinematic coefficient, exactly")
    _add_indices(p, "n", "j", "k", "s", "l", "i", "m")
    return parser


# -- subcommands -------------------------------------------------------------


def _polytope_arg(args) -> Polytope:
    if args.polytope_file:
        return _load_polytope(args.polytope_file, args.dim)
    return _load_polytope(args.polytope, args.dim)


def _query(args) -> KinematicQuery:
    return KinematicQuery(_load_polytope(args.P, args.dim), _load_polytope(args.Pp, args.dim),
                          args.j, args.r, args.s, args.l, parse_region(args.beta), parse_region(args.betap))


def cmd_measure(args):
    P = _polytope_arg(args)
    spec = MeasureSpec(args.j, args.r, args.s, args.l, parse_region(args.beta), parse_sphere_region(args.omega))
    res = local_minkowski(P, spec, rng=RngStream(args.seed, "measure"), samples=args.mc_n)
    return dict(res.to_json(), query={"P": P.to_json(), **spec.to_json()}, seed=args.seed), True


def cmd_rhs(args):
    q = _query(args)
    res = rhs_theorem_main_terms(q) if args.variant == "main" else rhs_special_terms(q, args.variant)
    return dict(res.to_json(), query=q.to_json(), variant=args.variant), True


def cmd_verify(args):
    # lazy: importing the sampler loads the compiled kernels
    from .lhs import verify_kinematic, verify_weighted

    q = _query(args)
    samples = args.samples or DEFAULT_SAMPLES.get(q.n, 200_000)
    timing = not args.no_timing
    if args.command == "verify-weighted":
        rep = verify_weighted(q, args.r_hat, args.r_bar, samples, args.seed, args.batches, args.workers, timing)
    else:
        rep = verify_kinematic(q, samples, args.seed, args.batches, args.workers, timing)
    return rep.to_json(), rep.passed


def cmd_lemma(args):
    given = {k: getattr(args, k) for k in ("n", "k", "j", "r", "a", "i", "l", "m", "s", "t")
             if getattr(args, k) is not None}
    if args.case is not None:
        cases = lemmas.DEFAULT_CASES[args.id]
        if not 0 <= args.case < len(cases):
            raise UsageError(f"--case must be in [0, {len(cases)})")
        params = dict(cases[args.case], **given)
    elif given:
        params = given
    else:
        params = dict(lemmas.DEFAULT_CASES[args.id][0])
    rep = lemmas.verify_lemma(args.id, params, args.samples, args.seed, timing=not args.no_timing)
    out = rep.to_json()
    out["power_self_test"] = power_self_test(rep)
    return out, rep.passed and rep.extra.get("sides_pass", True)


def cmd_steiner(args):
    from .steiner import verify_local_steiner

    rep = verify_local_steiner(_polytope_arg(args), parse_region(args.beta), parse_sphere_region(args.omega),
                               args.eps, args.samples, args.seed, timing=not args.no_timing)
    return rep.to_json(), rep.passed


def cmd_identities(args):
    rep = ex.identity_suite(args.suite, max_q=args.max_q)
    table = [{"identity": k, "passed": p, "total": t} for k, (p, t) in rep.counts().items()]
    return {"suite": args.suite, "table": table, "failures": [f.to_json() for f in rep.failures[:50]],
            "pass": rep.passed}, rep.passed


def cmd_coeff(args):
    idx = ex.CoeffIndex(args.n, args.j, args.k, args.s, args.l, args.i, args.m)
    c = ex.c_kinematic(idx)
    return {"index": {"n": args.n, "j": args.j, "k": args.k, "s": args.s, "l": args.l, "i": args.i,
                      "m": args.m}, "value": str(c), "decimal": float(c)}, True


COMMANDS = {"measure": cmd_measure, "rhs": cmd_rhs, "verify-kinematic": cmd_verify,
            "verify-weighted": cmd_verify, "lemma": cmd_lemma, "steiner": cmd_steiner,
            "identities": cmd_identities, "coeff": cmd_coeff}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        doc, ok = COMMANDS[args.command](args)
    except UsageError as err:
        print(err, file=sys.stderr)
        return 2
    except USAGE_ERRORS as err:
        print(f"tensorkin: error: {err}", file=sys.stderr)
        return 2
    text = json.dumps(doc, sort_keys=True, default=_json_default)
    if getattr(args, "json_out", None):
        with open(args.json_out, "w") as fh:
            fh.write(text + "\n")
    sys.stdout.write(text + "\n")
    return 0 if ok else 1


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


if __name__ == "__main__":
    sys.exit(main())
