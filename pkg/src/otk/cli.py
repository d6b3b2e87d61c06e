"""Command-line interface (installed as ``otk``).

Exit codes: 0 success, 1 invariant violation, 2 convergence failure,
3 configuration or I/O error.
"""

import argparse
import sys

import numpy as np

from .errors import ConfigError, ConsistencyError, ConvergenceFailure, OtkError
from .ranges import range_sample_to_csv, sample_V, sample_W
from .solvers import DistOptions, VarianceOptions, dist_to_scalars, max_variance
from .tuples import BlockSpec, FactorSpec, gallery, gen_doubly, gen_toeplitz
from .verify import (
    SuiteConfig,
    check_equality,
    dumps_canonical,
    load_tuple,
    run_suite,
    save_tuple,
)

_CLASS_MAP = {
    "doubly": "doubly_commuting",
    "toeplitz": "toeplitz_section",
    "normal": "commuting_normal",
    "d1": "d1",
    "general": "general",
}


def _parse_factors(text: str) -> FactorSpec:
    blocks = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            raise ConfigError(f"empty block in factor spec {text!r}")
        try:
            dims = tuple(int(p) for p in part.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad factor sizes {part!r}: {exc}") from exc
        blocks.append(BlockSpec(dims))
    return FactorSpec(tuple(blocks))


def _parse_symbol(text: str) -> dict:
    sym = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item or not item.startswith("c"):
            raise ConfigError(f"symbol entry {item!r} is not of the form c<k>=<value>")
        key, val = item.split("=", 1)
        try:
            offset = int(key[1:])
            coeff = complex(val)
        except ValueError as exc:
            raise ConfigError(f"bad symbol entry {item!r}: {exc}") from exc
        sym[offset] = coeff
    if not sym:
        raise ConfigError(f"symbol {text!r} has no coefficients")
    return sym


def _fmt_complex_vec(z) -> str:
    return "(" + ", ".join(f"{v.real:.12g}{v.imag:+.12g}j" for v in z) + ")"


def _cmd_dist(args) -> int:
    a = load_tuple(args.tuple)
    res = dist_to_scalars(a, DistOptions(tol_grad=args.tol, seed=args.seed))
    if args.json:
        print(
            dumps_canonical(
                {
                    "dist": res.dist,
                    "dist2": res.dist2,
                    "z0": [[z.real, z.imag] for z in res.z0],
                    "iterations": res.iterations,
                    "certificate_residual": res.certificate_residual,
                    "converged": res.converged,
                    "options": res.options,
                }
            )
        )
    else:
        print(f"dist   = {res.dist:.12g}")
        print(f"dist^2 = {res.dist2:.12g}")
        print(f"z0     = {_fmt_complex_vec(res.z0)}")
        print(f"certificate residual = {res.certificate_residual:.3e} "
              f"({'converged' if res.converged else 'NOT converged'}, {res.iterations} iterations)")
    return 0 if res.converged else 2


def _cmd_maxvar(args) -> int:
    a = load_tuple(args.tuple)
    res = max_variance(a, VarianceOptions(restarts=args.restarts, seed=args.seed))
    if args.json:
        print(
            dumps_canonical(
                {
                    "maxvar": res.value,
                    "argmax": [[v.real, v.imag] for v in res.argmax],
                    "restarts": res.restarts_used,
                    "per_restart": list(res.per_restart),
                    "options": res.options,
                }
            )
        )
    else:
        print(f"max variance = {res.value:.12g}  ({res.restarts_used} restarts)")
    return 0


def _cmd_vrange(args) -> int:
    a = load_tuple(args.tuple)
    if args.kind == "W":
        s = sample_W(a, args.samples, seed=args.seed, boundary_dirs=args.boundary)
    else:
        s = sample_V(a, args.samples, seed=args.seed, boundary_dirs=args.boundary)
    range_sample_to_csv(s, args.out)
    print(f"wrote {s.points.shape[0]} {args.kind}-range points to {args.out}")
    return 0


def _cmd_check(args) -> int:
    a = load_tuple(args.tuple)
    rep = check_equality(a, expected_class=_CLASS_MAP[args.cls])
    print(dumps_canonical(rep.to_dict()))
    return 0


def _cmd_gen_doubly(args) -> int:
    spec = _parse_factors(args.factors)
    tup, _ = gen_doubly(spec, seed=args.seed, conjugate=args.conjugate)
    save_tuple(args.out, tup)
    print(f"wrote doubly commuting tuple (d={tup.d}, n={tup.n}) to {args.out}")
    return 0


def _cmd_gen_toeplitz(args) -> int:
    symbols = [_parse_symbol(s) for s in args.symbol]
    tup = gen_toeplitz(symbols, args.n)
    save_tuple(args.out, tup)
    print(f"wrote Toeplitz section tuple (d={tup.d}, n={tup.n}) to {args.out}")
    return 0


def _cmd_gallery(args) -> int:
    tup = gallery(args.name)
    save_tuple(args.out, tup)
    print(f"wrote gallery tuple {args.name!r} to {args.out}")
    return 0


def _cmd_suite(args) -> int:
    config = SuiteConfig.from_json_file(args.config) if args.config else SuiteConfig()
    if args.out:
        config = __import__("dataclasses").replace(config, out_json=args.out)
    if args.csv_dir:
        config = __import__("dataclasses").replace(config, csv_dir=args.csv_dir)
    summary = run_suite(config)
    for crit in summary["criteria"]:
        status = "PASS" if crit["passed"] else "FAIL"
        print(f"[{status}] {crit['name']}")
    print(f"suite: {'all passed' if summary['all_passed'] else 'FAILURES PRESENT'}")
    return 0 if summary["all_passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="otk", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("dist", help="distance from a tuple to the scalar tuples")
    q.add_argument("tuple")
    q.add_argument("--tol", type=float, default=1e-9)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--json", action="store_true")
    q.set_defaults(fn=_cmd_dist)

    q = sub.add_parser("maxvar", help="maximal variance over the unit sphere")
    q.add_argument("tuple")
    q.add_argument("--restarts", type=int, default=64)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--json", action="store_true")
    q.set_defaults(fn=_cmd_maxvar)

    q = sub.add_parser("vrange", help="sample the joint (maximal) numerical range to CSV")
    q.add_argument("tuple")
    q.add_argument("--samples", type=int, default=4096)
    q.add_argument("--boundary", type=int, default=512)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", required=True)
    q.add_argument("--kind", choices=("W", "V"), default="V")
    q.set_defaults(fn=_cmd_vrange)

    q = sub.add_parser("check", help="dist^2 vs max-variance equality report")
    q.add_argument("tuple")
    q.add_argument("--class", dest="cls", choices=sorted(_CLASS_MAP), default="general")
    q.set_defaults(fn=_cmd_check)

    gen = sub.add_parser("gen", help="generate tuples")
    gensub = gen.add_subparsers(dest="generator", required=True)

    q = gensub.add_parser("doubly", help="random doubly commuting tuple in tensor form")
    q.add_argument("--factors", required=True, help="factor sizes, e.g. 2,2;3,1")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--conjugate", action="store_true", help="hide the block structure with a random unitary")
    q.add_argument("--out", required=True)
    q.set_defaults(fn=_cmd_gen_doubly)

    q = gensub.add_parser("toeplitz", help="finite Toeplitz sections from symbols")
    q.add_argument("--symbol", action="append", required=True, help='e.g. "c-1=0.5,c0=1,c1=2j" (repeat per component)')
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(fn=_cmd_gen_toeplitz)

    q = sub.add_parser("gallery", help="write a named worked example")
    q.add_argument("name", choices=("pauli", "d2", "ex2"))
    q.add_argument("--out", required=True)
    q.set_defaults(fn=_cmd_gallery)

    q = sub.add_parser("suite", help="run the verification suite")
    q.add_argument("--config", help="suite config JSON (defaults to the built-in config)")
    q.add_argument("--out", help="write the JSON summary here")
    q.add_argument("--csv-dir", help="export gallery range samples to this directory")
    q.set_defaults(fn=_cmd_suite)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConvergenceFailure as exc:
        print(f"error: convergence failure: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConsistencyError as exc:
        print(f"error: invariant violation: {exc}", file=sys.stderr)
        return 1
    except OtkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
