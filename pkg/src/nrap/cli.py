"""Command line interface.

Subcommands: gen, solve, verify, bench, profile, scaling.  Run
``nrap <subcommand> --help`` for options.
"""

from __future__ import annotations

import argparse
import sys

from .bench import (
    BenchMatrix,
    performance_profile,
    read_records,
    run_bench,
    scaling_fit,
    write_profile,
    write_records,
)
from .families import Family, Sense
from .fileio import read_instance, read_solution, write_instance, write_solution
from .generate import GenSpec, generate
from .problem import Status, kkt_residual
from .registry import ALGORITHMS, solve_named

__all__ = ["main"]


def _add_gen(sub):
    p = sub.add_parser("gen", help="generate a problem instance file")
    p.add_argument("--family", required=True, choices=[f.value for f in Family])
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--h-frac", required=True, type=float, help="target interior fraction")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--sense", default="eq", choices=["eq", "le"])
    p.add_argument("--out", required=True)


def _add_solve(sub):
    p = sub.add_parser("solve", help="solve an instance file with a named algorithm")
    p.add_argument("--alg", required=True, choices=list(ALGORITHMS))
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--tol", type=float, default=1e-8, help="KKT tolerance for the optimal status")
    p.add_argument("--out", required=True)


def _add_verify(sub):
    p = sub.add_parser("verify", help="check a solution file against an instance")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sol", required=True)
    p.add_argument("--tol", type=float, default=1e-7)


def _add_bench(sub):
    p = sub.add_parser("bench", help="run a solver x instance matrix and write results CSV")
    p.add_argument("--algs", required=True, help="comma separated algorithm names")
    p.add_argument("--families", required=True, help="comma separated family names")
    p.add_argument("--sizes", required=True, help="comma separated n values")
    p.add_argument("--h-fracs", required=True, help="comma separated interior fractions")
    p.add_argument("--seeds", required=True, help="comma separated seeds")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--sense", default="eq", choices=["eq", "le"])
    p.add_argument("--out", required=True)


def _add_profile(sub):
    p = sub.add_parser("profile", help="compute performance profile points from results CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--r-max", type=float, default=None)


def _add_scaling(sub):
    p = sub.add_parser("scaling", help="log-log slope of mean solve time vs n")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--alg", required=True)


def _split(text: str) -> list[str]:
    return [t for t in (s.strip() for s in text.split(",")) if t]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nrap")
    sub = parser.add_subparsers(dest="command", required=True)
    for add in (_add_gen, _add_solve, _add_verify, _add_bench, _add_profile, _add_scaling):
        add(sub)
    args = parser.parse_args(argv)

    if args.command == "gen":
        spec = GenSpec(
            family=Family(args.family), n=args.n, h_frac=args.h_frac,
            seed=args.seed, sense=Sense(args.sense),
        )
        write_instance(generate(spec), args.out)
        return 0

    if args.command == "solve":
        inst = read_instance(args.infile)
        sol = solve_named(inst, args.alg)
        if sol.status is Status.OPTIMAL:
            report = kkt_residual(inst, sol.x, sol.mu)
            if report.max_residual > args.tol:
                sol.status = Status.APPROXIMATE
        write_solution(sol, args.out, alg=args.alg)
        print(f"{args.alg}: status={sol.status.value} mu={sol.mu:.12g} iters={sol.iterations}")
        return 0

    if args.command == "verify":
        inst = read_instance(args.infile)
        _, sol = read_solution(args.sol)
        report = kkt_residual(inst, sol.x, sol.mu)
        print(f"feasibility_residual={report.feasibility_residual:.6g}")
        print(f"stationarity_residual={report.stationarity_residual:.6g}")
        print(f"complementarity_residual={report.complementarity_residual:.6g}")
        print(f"sign_violation={report.sign_violation:.6g}")
        print(f"max_residual={report.max_residual:.6g}")
        passed = report.max_residual <= args.tol
        print("PASS" if passed else "FAIL")
        return 0 if passed else 1

    if args.command == "bench":
        matrix = BenchMatrix(
            families=tuple(Family(f) for f in _split(args.families)),
            sizes=tuple(int(s) for s in _split(args.sizes)),
            h_fracs=tuple(float(h) for h in _split(args.h_fracs)),
            seeds=tuple(int(s) for s in _split(args.seeds)),
            algs=tuple(_split(args.algs)),
        )
        records = run_bench(matrix, reps=args.reps, sense=Sense(args.sense))
        write_records(records, args.out)
        print(f"wrote {len(records)} records to {args.out}")
        return 0

    if args.command == "profile":
        records = read_records(args.infile)
        points = performance_profile(records, r_max=args.r_max)
        write_profile(points, args.out)
        print(f"wrote {len(points)} profile points to {args.out}")
        return 0

    if args.command == "scaling":
        records = read_records(args.infile)
        slope = scaling_fit(records, args.alg)
        print(f"{slope:.6g}")
        return 0

    parser.error(f"unknown command {args.command}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
