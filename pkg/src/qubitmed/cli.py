"""Command-line front end.

Exit codes: 0 success, 1 input or validation error, 2 solver exhausted,
3 certificate failure, 4 statistical rejection in ``sample``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import QubitMedError, SolverExhausted
from .fileio import load_povm, load_problem
from .reports import certificate_json, sample_json, sig, solution_json, sweep_csv, trine_sweep
from .solver import solve
from .verification import certify, dual_oracle, sample_outcomes

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_EXHAUSTED = 2
EXIT_NOT_OPTIMAL = 3
EXIT_STATISTICS = 4


def _dump(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _tolerances(args) -> Tolerances:
    tol = DEFAULT_TOLERANCES
    if getattr(args, "tolerance", None) is not None:
        tol = tol.override(equality=args.tolerance)
    return tol


def _problem(args):
    ensemble, tol = load_problem(args.problem)
    if args.tolerance is not None:
        tol = tol.override(equality=args.tolerance)
    return ensemble, tol


def cmd_solve(args) -> int:
    ensemble, tol = _problem(args)
    try:
        sol = solve(ensemble, tol)
    except SolverExhausted as exc:
        g0, g = exc.oracle
        _dump({"error": str(exc), "oracle": {"gamma0_star": sig(g0), "gamma_star": [sig(x) for x in g]}}, args.out)
        return EXIT_EXHAUSTED
    _dump(solution_json(sol, tol), args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    ensemble, tol = _problem(args)
    povm = load_povm(args.povm, tol)
    cert = certify(ensemble, povm, tol)
    _dump(certificate_json(cert, full_precision=True), args.out)
    return EXIT_OK if cert.optimal else EXIT_NOT_OPTIMAL


def cmd_oracle(args) -> int:
    ensemble, tol = _problem(args)
    g0, g = dual_oracle(ensemble, tol)
    report = {"gamma0_star": sig(g0), "gamma_star": [sig(x) for x in g]}
    code = EXIT_OK
    if args.compare:
        try:
            sol = solve(ensemble, tol)
        except SolverExhausted:
            report["solver"] = None
            code = EXIT_EXHAUSTED
        else:
            report["solver_p_guess"] = sig(sol.p_guess)
            report["gap"] = float(f"{sol.p_guess - g0:.3e}")
    _dump(report, args.out)
    return code


def cmd_sample(args) -> int:
    ensemble, tol = _problem(args)
    povm = load_povm(args.povm, tol)
    report = sample_outcomes(ensemble, povm, args.shots, args.seed)
    _dump(sample_json(report), args.out)
    return EXIT_OK if abs(report.z_score) <= 4.0 else EXIT_STATISTICS


def cmd_sweep_trine(args) -> int:
    tol = _tolerances(args)
    text = sweep_csv(trine_sweep(args.p_steps, args.delta_steps, tol))
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_INPUT
        sys.stdout.write(text.rsplit("\n", 2)[-2] + "\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors share exit code 1 with other input errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qubitmed", description="Minimum-error discrimination of qubit states.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, povm=False):
        p.add_argument("problem", help="problem file (JSON)")
        if povm:
            p.add_argument("povm", help="POVM file or solve report (JSON)")
        p.add_argument("--tolerance", type=float, help="equality tolerance (default 1e-9)")
        p.add_argument("--out", help="write the report here instead of stdout")

    p = sub.add_parser("solve", help="optimal measurement and guessing probability")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="check optimality of a given POVM")
    common(p, povm=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("oracle", help="direct convex minimization of the dual bound")
    common(p)
    p.add_argument("--compare", action="store_true", help="also run the solver and report the gap")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sample", help="Monte Carlo measurement records")
    common(p, povm=True)
    p.add_argument("--shots", type=int, default=100000, help="shots per state")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("sweep-trine", help="weighted-trine grid: solver against closed forms (CSV)")
    p.add_argument("--p-steps", type=int, default=50)
    p.add_argument("--delta-steps", type=int, default=50)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_sweep_trine)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "shots", 1) < 1:
            parser.error("--shots must be >= 1")
        for name in ("p_steps", "delta_steps"):
            if getattr(args, name, 2) < 2:
                parser.error(f"--{name.replace('_', '-')} must be >= 2")
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return args.func(args)
    except (QubitMedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
