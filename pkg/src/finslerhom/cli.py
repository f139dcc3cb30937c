"""Command-line entry point.

    finslerhom check   --catalog su2
    finslerhom gv test 1,2,3 --catalog su2
    finslerhom gv find --catalog heis3 --resolution 10000
    finslerhom flag e1 "(e2+e4)/√2" --catalog su2r --phi randers --x 0.4*e4
    finslerhom verify --model heis3_randers.fhm --seed 7
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .commands import EXIT_OK, EXIT_VALIDATION, run_command
from .errors import FinslerError, ModelError
from .model import parse_model, parse_vector
from .output import emit_results

MODELS_DIR = Path(__file__).with_name("models")


def _common():
    p = argparse.ArgumentParser(add_help=False)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--model", help="model file (a bare name also looks in the shipped models)")
    src.add_argument("--catalog", help="catalog algebra: su2, heis3, abelian(n), su2r, so3_so2, so3r_so2")
    p.add_argument("--phi", help="riemannian | randers | polynomial:c0,c1,...")
    p.add_argument("--b0", type=float, help="domain bound for a polynomial phi")
    p.add_argument("--x", help="vector X defining beta, e.g. 0,0,0.5 or 0.4*e4")
    p.add_argument("--metric", help="identity | diag:1,1,2 | full:r1|r2|...")
    p.add_argument("--tol", type=float, help="tolerance for geodesic verdicts")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="finslerhom", description="Invariant (alpha,beta)-metrics on homogeneous spaces")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="structural invariant reports")

    gv = sub.add_parser("gv", help="geodesic vectors")
    gv_sub = gv.add_subparsers(dest="gv_command", required=True)
    test = gv_sub.add_parser("test", parents=[common], help="test one vector")
    test.add_argument("vector")
    test.add_argument("--over", choices=("m", "g"), default="m", help="range of Z in the Finsler criterion")
    find = gv_sub.add_parser("find", parents=[common], help="search the unit sphere")
    find.add_argument("--mode", choices=("riemannian", "finsler"), default="riemannian")
    find.add_argument("--resolution", type=int, default=10_000)
    find.add_argument("--solve-tol", type=float, default=1e-10)
    find.add_argument("--dense", action="store_true", help="emit every sample of traced curves")

    flag = sub.add_parser("flag", parents=[common], help="flag curvature of span{y, u} with flagpole y")
    flag.add_argument("y")
    flag.add_argument("u")

    verify = sub.add_parser("verify", parents=[common], help="oracle property suite")
    verify.add_argument("--samples", type=int, default=200)
    return parser


def model_text(args):
    if args.model:
        path = Path(args.model)
        if not path.exists() and (MODELS_DIR / args.model).exists():
            path = MODELS_DIR / args.model
        text = path.read_text(encoding="utf-8")
    else:
        text = f"algebra {args.catalog or 'su2'}"
    overrides = []
    if args.metric:
        overrides.append(f"metric {args.metric}")
    if args.x:
        overrides.append(f"x {args.x}")
    if args.b0 is not None:
        overrides.append(f"b0 {args.b0!r}")
    if args.phi:
        overrides.append(f"phi {args.phi}")
    if args.tol is not None:
        overrides.append(f"tol {args.tol!r}")
    return text + "\n" + "\n".join(overrides) + "\n"


def dispatch(args, bundle):
    labels = bundle.algebra.labels
    if args.command == "check":
        return run_command(bundle, "check")
    if args.command == "gv" and args.gv_command == "test":
        return run_command(bundle, "gv test", parse_vector(args.vector, labels), args.over)
    if args.command == "gv":
        return run_command(bundle, "gv find", args.mode, args.resolution, args.seed, args.solve_tol, args.dense)
    if args.command == "flag":
        return run_command(bundle, "flag", parse_vector(args.y, labels), parse_vector(args.u, labels))
    return run_command(bundle, "verify", seed=args.seed, samples=args.samples)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        bundle = parse_model(model_text(args))
        status, rows = dispatch(args, bundle)
    except (ModelError, FinslerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    sys.stdout.write(emit_results(rows, args.format))
    return status if status is not None else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
