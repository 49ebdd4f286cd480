"""Command-line front end: ``qrac eval|nogo|regions|optimize|demo|export``.

Exit codes: 0 success, 1 nothing refuted (``nogo`` only), 2 usage or
malformed input, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .cloning import example3_summary
from .geometry import CapacityError, bloch_radius, max_regions, no_go_certificate, povm_to_halfspace, realized_patterns
from .optimizer import MAX_BITS, MAX_QUBITS, SeeSawConfig, ascent_trace_check, see_saw
from .schemefile import SchemeFormatError, SchemeInvariantError, load_scheme, save_scheme, scheme_to_dict
from .schemes import (
    HINRY7_CLOSED_FORM,
    STANDARD_SCHEMES,
    evaluate_scheme,
    nayak_bound,
    standard_scheme,
)

EXIT_OK, EXIT_NOT_REFUTED, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _digits(args) -> int:
    return 17 if getattr(args, "full_precision", False) else 9


def _fmt(v: float, digits: int) -> str:
    return f"{v:.{digits}g}"


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _resolve(source: str | None, builtin: str | None):
    if builtin:
        return standard_scheme(builtin)
    if source in STANDARD_SCHEMES and not Path(source).exists():
        return standard_scheme(source)
    try:
        return load_scheme(source)
    except FileNotFoundError:
        raise _Fail(EXIT_USAGE, f"no such file or builtin scheme: {source}") from None
    except SchemeFormatError as exc:
        raise _Fail(EXIT_USAGE, f"malformed scheme file: {exc}") from None
    except SchemeInvariantError as exc:
        raise _Fail(EXIT_INVARIANT, f"invalid scheme: {exc}") from None


def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("path", nargs="?", help="scheme JSON file (or a builtin name)")
    p.add_argument("--builtin", choices=STANDARD_SCHEMES)
    p.add_argument("--full-precision", action="store_true", help="print 17 significant digits")


def _source(args):
    if not args.path and not args.builtin:
        raise _Fail(EXIT_USAGE, "give a scheme path or --builtin NAME")
    if args.path and args.builtin:
        raise _Fail(EXIT_USAGE, "give either a scheme path or --builtin, not both")
    return _resolve(args.path, args.builtin)


def cmd_eval(args) -> int:
    scheme = _source(args)
    report = evaluate_scheme(scheme)
    out = {"label": scheme.label, "n": scheme.n, "m": scheme.m}
    out.update(report.to_dict(_digits(args), table=args.table))
    _emit(out)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x"] + [f"bit{i + 1}" for i in range(scheme.n)])
            for x, row in zip(report.keys, report.per_cell):
                w.writerow([x] + [repr(float(v)) for v in row])
    return EXIT_OK


def cmd_nogo(args) -> int:
    if not args.claimed_p > 0.5:
        raise _Fail(EXIT_USAGE, "nothing to refute: --claimed-p must exceed 0.5")
    if args.claimed_p > 1:
        raise _Fail(EXIT_USAGE, "--claimed-p must be a probability")
    scheme = _source(args)
    cert = no_go_certificate(scheme, args.claimed_p)
    _emit({"label": scheme.label, "n": scheme.n, "m": scheme.m, **cert.to_dict(_digits(args))})
    if cert.status == "refuted":
        return EXIT_OK
    if cert.status == "inconsistent":
        print("inconsistency with the counting bound: every strict inequality holds; check tolerances", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_NOT_REFUTED


def cmd_regions(args) -> int:
    if args.from_scheme:
        scheme = _resolve(args.from_scheme, None)
        hs = [povm_to_halfspace(p, i) for i, p in enumerate(scheme.povms)]
        d = scheme.dim**2 - 1
        witnesses = realized_patterns(hs, d, margin_eps=args.margin_eps, radius=bloch_radius(scheme.dim))
        bound = max_regions(len(hs), d)
        realized = [w for w in witnesses if w.realized]
        _emit(
            {
                "label": scheme.label,
                "k": len(hs),
                "d": d,
                "ball_radius": bloch_radius(scheme.dim),
                "max_regions": bound,
                "realized": len(realized),
                "undecided": sum(w.status == "undecided" for w in witnesses),
                "summary": f"{len(realized)} realized of max {bound}",
                "witnesses": [w.to_dict() for w in witnesses],
            }
        )
        return EXIT_OK
    if args.k is None or args.d is None:
        raise _Fail(EXIT_USAGE, "give --k and --d, or --from-scheme")
    try:
        value = max_regions(args.k, args.d)
    except CapacityError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from None
    except ValueError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from None
    _emit({"k": args.k, "d": args.d, "max_regions": value})
    return EXIT_OK


def cmd_optimize(args) -> int:
    if not 1 <= args.n <= MAX_BITS or not 1 <= args.m <= MAX_QUBITS:
        raise _Fail(EXIT_USAGE, f"need 1 <= n <= {MAX_BITS} and 1 <= m <= {MAX_QUBITS}")
    try:
        cfg = SeeSawConfig(
            restarts=args.restarts,
            max_iters=args.max_iters,
            conv_tol=args.conv_tol,
            seed=args.seed,
            objective=args.objective,
            reweight_rounds=args.reweight_rounds,
            reweight_rate=args.reweight_rate,
        )
    except ValueError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from None
    result = see_saw(args.n, args.m, cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"qrac_n{args.n}_m{args.m}_seed{args.seed}"
    save_scheme(result.scheme, out / f"{stem}.scheme.json")
    digits = _digits(args)
    report = {
        "n": args.n,
        "m": args.m,
        "seed": args.seed,
        "best_restart": result.restart,
        "restart_seed": result.seed,
        "converged": result.converged,
        "trace_violations": len(ascent_trace_check(result).violations),
        **result.report.to_dict(digits, table=True),
        "restarts": [
            {**r, "worst_case_p": float(_fmt(r["worst_case_p"], digits)), "average_p": float(_fmt(r["average_p"], digits))}
            for r in result.restart_summary
        ],
    }
    (out / f"{stem}.report.json").write_text(json.dumps(report, indent=2) + "\n")
    with open(out / f"{stem}.trace.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["round", "iteration", "phase", "objective", "average_p", "worst_case_p"])
        for row in result.trace:
            w.writerow([row.round, row.iteration, row.phase, repr(row.objective), repr(row.average_p), repr(row.worst_case_p)])
    print(
        f"n={args.n} m={args.m} seed={args.seed} worst_case_p={_fmt(result.report.worst_case_p, digits)} "
        f"average_p={_fmt(result.report.average_p, digits)} -> {out / stem}.*"
    )
    return EXIT_OK


def _demo_example3(digits: int) -> None:
    s = example3_summary()
    report = evaluate_scheme(standard_scheme("example3"))
    print("clone-and-guess coding of 4 bits into 1 qubit")
    print(f"  p0 (worst success when the guessed half was sent): {_fmt(s.p_branch, digits)}")
    print(f"  naive claim (p0 + 1/2) / 2:                        {_fmt(s.naive_p, digits)}")
    print(f"  exhaustive worst case:                             {_fmt(s.true_p, digits)}")
    print(f"  worst cell: x={s.argmin_cell[0]} bit {s.argmin_cell[1] + 1}")
    print(f"  naive > 1/2: {s.naive_p > 0.5}; truth <= 1/2: {s.true_p <= 0.5 + 1e-9}")
    print("  x     " + " ".join(f"bit{i + 1:<7}" for i in range(4)))
    for x, row in zip(report.keys, report.per_cell):
        print(f"  {x}  " + " ".join(f"{v:<10.{min(digits, 8)}f}" for v in row))


def _demo_hinry7(digits: int) -> None:
    report = evaluate_scheme(standard_scheme("hinry7"))
    print("seven bits into two qubits")
    for i, p in enumerate(report.per_bit_worst()):
        print(f"  bit {i + 1}: worst {_fmt(float(p), digits)}")
    print(f"  min cell: {_fmt(report.worst_case_p, digits)} at x={report.argmin_cell[0]} bit {report.argmin_cell[1] + 1}")
    print(f"  closed form (9 + 2 sqrt 3) / 23 = {_fmt(HINRY7_CLOSED_FORM, digits)}")
    print(f"  |difference| = {abs(report.worst_case_p - HINRY7_CLOSED_FORM):.3e}")


def _demo_nayak(digits: int) -> None:
    ps = [0.51] + [round(0.55 + 0.05 * k, 2) for k in range(9)]
    print("lower bound (1 - H(p)) n on qubits m")
    print("  n   " + " ".join(f"p={p:<6}" for p in ps))
    for n in (2, 3, 4, 7, 16, 100):
        print(f"  {n:<3} " + " ".join(f"{nayak_bound(n, p):<8.4f}" for p in ps))
    print(f"  n=4, p=0.51: bound {_fmt(nayak_bound(4, 0.51), digits)} < 1 qubit")


def cmd_demo(args) -> int:
    {"example3": _demo_example3, "hinry7": _demo_hinry7, "nayak": _demo_nayak}[args.name](_digits(args))
    return EXIT_OK


def cmd_export(args) -> int:
    scheme = standard_scheme(args.name)
    if args.output == "-":
        print(json.dumps(scheme_to_dict(scheme), indent=1))
    else:
        save_scheme(scheme, args.output)
    return EXIT_OK


def _default_seed() -> int:
    raw = os.environ.get("QRAC_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrac", description="Quantum random access codings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="success probabilities of a scheme")
    _add_source(p)
    p.add_argument("--table", action="store_true", help="include the per-cell table")
    p.add_argument("--csv", help="write the per-cell table to this CSV file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("nogo", help="refute a claimed success probability")
    _add_source(p)
    p.add_argument("--claimed-p", type=float, required=True)
    p.set_defaults(func=cmd_nogo)

    p = sub.add_parser("regions", help="hyperplane region counts")
    p.add_argument("--k", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--from-scheme", help="scheme file or builtin name")
    p.add_argument("--margin-eps", type=float, default=1e-7)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("optimize", help="see-saw search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--conv-tol", type=float, default=1e-9)
    p.add_argument("--objective", choices=("average", "weighted"), default="weighted")
    p.add_argument("--reweight-rounds", type=int, default=20)
    p.add_argument("--reweight-rate", type=float, default=0.5)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--full-precision", action="store_true")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("demo", help="narrated reproductions")
    p.add_argument("name", choices=("example3", "hinry7", "nayak"))
    p.add_argument("--full-precision", action="store_true")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("export", help="write a builtin scheme as JSON")
    p.add_argument("name", choices=STANDARD_SCHEMES)
    p.add_argument("output", nargs="?", default="-")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"qrac: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
