"""Command-line front door.

Subcommands: solve, witt-decompose, construct-w, census, check-group,
selftest.  Certificates are emitted as JSON on stdout, censuses as CSV;
human-readable summaries go to stderr.  Exit codes: 0 success, 2 usage
error, 3 no solution, 4 inconclusive, 5 internal invariant violation.
Identical requests produce byte-identical primary output; ISOFORM_THREADS
caps census parallelism (0 or 1 means serial).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import acceptance
from . import census as census_mod
from .errors import IsoformError
from .lagrangian import lift_meeting_lagrangian, result_certificates
from .linalg import certify_free_summand, echelonize
from .quadform import PfisterSpec, form_from_json, pfister_expand
from .ring import parse_ring_token
from .solver import INCONCLUSIVE, NO_SOLUTION, RepresentationProblem, check_group_law, solve_pfister
from .witt import witt_decompose, witt_decompose_local

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_SOLUTION = 3
EXIT_INCONCLUSIVE = 4
EXIT_INTERNAL = 5


def _emit_json(payload) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


def _read_source(text: str) -> str:
    if text == "-":
        return sys.stdin.read()
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as handle:
            return handle.read()
    return text


def _parse_ints(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip() != ""]


def _thread_count() -> int:
    raw = os.environ.get("ISOFORM_THREADS", "0")
    try:
        return max(int(raw), 0)
    except ValueError:
        return 0


def _cmd_solve(args) -> int:
    ring = parse_ring_token(args.ring)
    spec = PfisterSpec(ring, tuple(_parse_ints(args.pfister)))
    problem = RepresentationProblem(spec, args.c)
    cert = solve_pfister(problem, seed=args.seed, use_fast_paths=not args.no_fast_paths)
    _emit_json(cert.to_json())
    if cert.verdict == NO_SOLUTION:
        print("no solution: the residue form is not hyperbolic", file=sys.stderr)
        return EXIT_NO_SOLUTION
    if cert.verdict == INCONCLUSIVE:
        print("inconclusive: geometric search failed; see trace", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    value = pfister_expand(spec).quad(cert.witness)
    print(f"solved: witness evaluates to {value} in {ring}", file=sys.stderr)
    return EXIT_OK


def _cmd_witt_decompose(args) -> int:
    form = form_from_json(_read_source(args.form))
    decompose = witt_decompose if form.ring.kind == "fp" else witt_decompose_local
    dec = decompose(form, seed=args.seed)
    payload = {
        "index": dec.index,
        "hyperbolic_e": [[int(x) for x in row] for row in dec.basis.e_rows],
        "hyperbolic_f": [[int(x) for x in row] for row in dec.basis.f_rows],
        "anisotropic_gram": [[int(x) for x in row] for row in dec.anisotropic.gram],
    }
    _emit_json(payload)
    print(f"index {dec.index}, anisotropic rank {dec.anisotropic.n} over {form.ring}",
          file=sys.stderr)
    return EXIT_OK


def _cmd_construct_w(args) -> int:
    data = json.loads(_read_source(args.input))
    form = form_from_json(data["form"])
    seed = int(data.get("seed", args.seed))
    summand = certify_free_summand(form.ring, data["n_basis"])
    result = lift_meeting_lagrangian(form, summand, seed=seed)
    payload = {
        "w_basis": [[int(x) for x in row] for row in result.W.basis],
        "generator": [int(x) for x in result.generator],
        "certificates": result_certificates(form, summand, result),
    }
    _emit_json(payload)
    print(f"meet dimension {result.meet_dim} over {form.ring}", file=sys.stderr)
    return EXIT_OK


def _census_rows(args, primes) -> list[str]:
    n = args.n if args.n is not None else args.dim2n
    if args.family in ("z-strata", "z_strata"):
        rows = []
        for q in primes:
            q_form = census_mod.split_gram(q, n)
            ring = q_form.ring
            rng = np.random.default_rng(args.seed + q)
            while True:
                cand = rng.integers(0, q, size=(n // 2 + 1, n), dtype=np.int64)
                p_sub = echelonize(ring, cand)
                if p_sub.dim == n // 2 + 1 and q_form.restrict(p_sub.basis).is_nondegenerate():
                    break
            for stratum, count in census_mod.z_strata(q_form, p_sub).items():
                rows.append(f"z_strata,{n},{stratum},{q},{count},-,-")
        return rows
    report = census_mod.build_census(args.family, n, args.j, primes, seed=args.seed)
    return report.csv_rows()


def _cmd_census(args) -> int:
    if (args.n is None) == (args.dim2n is None):
        print("census: give exactly one of --n or --dim2n", file=sys.stderr)
        return EXIT_USAGE
    primes = sorted(_parse_ints(args.primes))
    threads = _thread_count()
    if threads > 1 and args.family not in ("z-strata", "z_strata"):
        n = args.n if args.n is not None else args.dim2n
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(
                lambda q: census_mod.count_flags(args.family, n, args.j, q, seed=args.seed),
                primes,
            ))
        report = census_mod.CensusReport(
            census_mod._family(args.family), n, args.j, dict(zip(primes, counts)),
            census_mod.predicted_dimension(args.family, n, args.j),
            census_mod.fit_degree(dict(zip(primes, counts))),
        )
        rows = report.csv_rows()
    else:
        rows = _census_rows(args, primes)
    sys.stdout.write("family,n,j,q,count,predicted_dim,fitted_degree\n")
    for row in rows:
        sys.stdout.write(row + "\n")
    print(f"census complete: {len(rows)} rows", file=sys.stderr)
    return EXIT_OK


def _cmd_check_group(args) -> int:
    ring = parse_ring_token(args.ring)
    spec = PfisterSpec(ring, tuple(_parse_ints(args.pfister)))
    report = check_group_law(spec, trials=args.trials, seed=args.seed)
    _emit_json(report.to_json())
    status = "ok" if report.passed else f"{len(report.violations)} violations"
    print(f"group-law check over {ring}: {status}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_INTERNAL


def _cmd_selftest(args) -> int:
    outcomes = acceptance.run(budget=args.budget, stream=sys.stderr)
    _emit_json({o.key: {"passed": o.passed, "details": o.details} for o in outcomes})
    return EXIT_OK if all(o.passed for o in outcomes) else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isoform",
        description="Exact quadratic-form toolkit over F_p and Z/p^k",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve Q = c for a Pfister form Q")
    solve.add_argument("--pfister", required=True, help="comma-separated unit slots, e.g. 2,3")
    solve.add_argument("--c", required=True, type=int, help="target unit")
    solve.add_argument("--ring", required=True, help="fp:p or zpk:p,k")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--no-fast-paths", action="store_true",
                       help="force the full geometric pipeline")
    solve.set_defaults(func=_cmd_solve)

    wd = sub.add_parser("witt-decompose", help="Witt-decompose a form descriptor")
    wd.add_argument("--form", required=True,
                    help='JSON {"ring":...,"gram":...} or {"ring":...,"pfister":[...]}; '
                         "@file or - for stdin")
    wd.add_argument("--seed", type=int, default=0)
    wd.set_defaults(func=_cmd_witt_decompose)

    cw = sub.add_parser("construct-w", help="construct a meeting isotropic summand")
    cw.add_argument("--input", required=True,
                    help='JSON {"form":...,"n_basis":[[...]],"seed":...}; @file or - for stdin')
    cw.add_argument("--seed", type=int, default=0)
    cw.set_defaults(func=_cmd_construct_w)

    census = sub.add_parser("census", help="count flag and isotropic families")
    census.add_argument("--family", required=True,
                        choices=["x", "x-iso", "x_iso", "y-iso", "y_iso", "z-strata", "z_strata"])
    census.add_argument("--n", type=int, help="ambient dimension")
    census.add_argument("--dim2n", type=int, help="ambient dimension, stated as 2n")
    census.add_argument("--j", type=int, default=1, help="flag length / subspace dimension")
    census.add_argument("--primes", default="3,5,7", help="comma-separated primes")
    census.add_argument("--seed", type=int, default=0)
    census.set_defaults(func=_cmd_census)

    cg = sub.add_parser("check-group", help="check the represented-unit group law")
    cg.add_argument("--pfister", required=True)
    cg.add_argument("--ring", required=True)
    cg.add_argument("--trials", type=int, default=20)
    cg.add_argument("--seed", type=int, default=0)
    cg.set_defaults(func=_cmd_check_group)

    st = sub.add_parser("selftest", help="run the acceptance suite")
    st.add_argument("--budget", choices=["quick", "full"], default="quick")
    st.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IsoformError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except AssertionError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
