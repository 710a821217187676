"""Command-line harness: run verifications, emit certificate reports.

Exit codes follow the three-valued logic so automation can tell refutation
from budget exhaustion: 0 all claims verified, 2 some claim refuted,
3 some claim unknown at budget, 1 bad parameters or malformed input.

Report files are byte-identical across runs for identical configurations;
wall time goes to stderr, never into the certificate body.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import examples as ex
from .filters import family_from_json, hausdorff_verdict
from .groups import Integers
from .nonabelian import fib_word, phi_iterate, verify_fib_identity, FREE_XY
from .prefixsum import SearchBudget
from .report import (
    Status,
    VerificationReport,
    canonical_json,
    report_document,
    stopwatch,
)

_EXIT_FOR_STATUS = {
    Status.VERIFIED: 0,
    Status.REFUTED: 2,
    Status.UNKNOWN: 3,
}

_INTEGERS = Integers()


@dataclass
class RunConfig:
    """Parsed configuration for a family-level verification run."""

    family: dict
    probes: list
    n_max: int = 3
    depth: int = 12
    max_len: int = 5
    window: int = 8
    budget: SearchBudget = field(default_factory=SearchBudget)

    @classmethod
    def from_json(cls, doc: dict) -> "RunConfig":
        # user sequences register before the family resolves their names
        from .sequences import register_prefix_sequence
        for name, spec in doc.get("sequences", {}).items():
            register_prefix_sequence(name, spec["prefix"],
                                     spec.get("doubling_from"))
        budgets = doc.get("budgets", {})
        cfg = cls(
            family=doc["family"],
            probes=list(doc["probes"]),
            n_max=int(budgets.get("n_max", 3)),
            depth=int(budgets.get("depth", 12)),
            max_len=int(budgets.get("max_len", 5)),
            window=int(budgets.get("window", 8)),
        )
        if min(cfg.n_max, cfg.depth, cfg.max_len, cfg.window) < 1:
            raise ValueError("budgets must be positive")
        if not cfg.probes:
            raise ValueError("probe list must be nonempty")
        if any(p == 0 for p in cfg.probes):
            raise ValueError("probes must exclude the identity")
        return cfg


def _emit(reports: list, out: Optional[str], fmt: str, elapsed: float) -> int:
    doc = report_document(reports)
    if fmt == "json":
        text = canonical_json(doc)
    else:
        lines = [f"status: {doc['status']}"]
        for claim in doc["claims"]:
            lines.append(f"  {claim['status']:<9} {claim['claim']}")
        text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"wall time: {elapsed:.3f}s ({len(reports)} claims)",
          file=sys.stderr)
    return _EXIT_FOR_STATUS[Status(doc["status"])]


def _cmd_verify(args) -> int:
    with stopwatch() as elapsed:
        if args.example == "sqrt7":
            if args.gmax < 1 or args.nmax < 1:
                print("gmax and nmax must be positive", file=sys.stderr)
                return 1
            reports = [
                ex.verify_sqrt7_necessary(g, n)
                for g in range(1, args.gmax + 1)
                for n in range(1, args.nmax + 1)
            ]
            if args.cover_m0:
                m0 = args.cover_m0
                ms = [m0] * (3 ** m0)
                reports.append(ex.verify_sqrt7_U_full(
                    m0, ms, list(range(-args.cover_gmax, args.cover_gmax + 1))
                ))
        elif args.example == "product":
            n_coords = args.coords
            if n_coords < 1:
                print("coordinate count must be positive", file=sys.stderr)
                return 1
            reports = []
            samples = ex.random_product_elements(n_coords, args.samples,
                                                 args.seed)
            for m0 in args.m0:
                ms = [min(m0 + i + 1, n_coords) for i in range(m0)]
                reports.append(
                    ex.verify_product_sum_full(n_coords, m0, ms, samples))
            for n in args.union_n:
                reports.append(ex.verify_product_union_small(n_coords, n))
        elif args.example == "interval":
            reports = [ex.verify_interval_example(args.min_exp)]
        elif args.example == "fibonacci":
            if args.n < 1:
                print("n must be positive", file=sys.stderr)
                return 1
            reports = [_fibonacci_report(args.n)]
            reports.extend(verify_fib_identity(n)
                           for n in range(min(args.n, 10) + 1))
        else:  # pragma: no cover - argparse restricts choices
            return 1
    return _emit(reports, args.out, args.format, elapsed())


def _fibonacci_report(top: int) -> VerificationReport:
    """Words from the recurrence match substitution iterates and their
    lengths follow the Fibonacci numbers."""
    x = FREE_XY.element("x")
    lengths = []
    ok = True
    fib_a, fib_b = 1, 1
    for n in range(top + 1):
        w = fib_word(n)
        ok = ok and w.word.value == phi_iterate(x, n).value
        lengths.append(w.length())
        ok = ok and w.length() == fib_a
        fib_a, fib_b = fib_b, fib_a + fib_b
    return VerificationReport(
        claim=f"fibonacci-words:n<={top}",
        status=Status.VERIFIED if ok else Status.REFUTED,
        payload={"lengths": lengths},
        budgets={"n": top},
    )


def _cmd_hausdorff(args) -> int:
    try:
        doc = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as err:
        print(f"cannot read config: {err}", file=sys.stderr)
        return 1
    try:
        cfg = RunConfig.from_json(doc)
        family = family_from_json(cfg.family)
    except (KeyError, ValueError) as err:
        print(f"bad config: {err}", file=sys.stderr)
        return 1
    probes = [_INTEGERS.element(int(p)) for p in cfg.probes]
    with stopwatch() as elapsed:
        report = hausdorff_verdict(
            family, probes,
            n_max=cfg.n_max, depth=cfg.depth, max_len=cfg.max_len,
            budget=cfg.budget,
        )
    return _emit([report], args.out, args.format, elapsed())


def _cmd_hensel(args) -> int:
    if args.k < 1:
        print("level k must be positive", file=sys.stderr)
        return 1
    try:
        with stopwatch() as elapsed:
            rows = []
            prev = None
            chain_ok = True
            for level in range(1, args.k + 1):
                w = ex.hensel_sqrt(args.a, args.p, level)
                if prev is not None:
                    mod = args.p ** (level - 1)
                    chain_ok = chain_ok and (w.root - prev) % mod == 0
                rows.append({"k": level, "modulus": args.p ** level,
                             "root": w.root})
                prev = w.root
    except ex.HenselError as err:
        print(f"hensel: {err}", file=sys.stderr)
        return 1
    report = VerificationReport(
        claim=f"hensel:p={args.p}:a={args.a}:k={args.k}",
        status=Status.VERIFIED if chain_ok else Status.REFUTED,
        payload={"levels": rows, "congruence_chain": chain_ok},
    )
    return _emit([report], args.out, args.format, elapsed())


def _cmd_recheck(args) -> int:
    from .recheck import recheck_document
    try:
        doc = json.loads(Path(args.report).read_text())
    except (OSError, json.JSONDecodeError) as err:
        print(f"cannot read report: {err}", file=sys.stderr)
        return 1
    ok, details = recheck_document(doc)
    for line in details:
        print(line)
    print("recheck:", "ok" if ok else "FAILED")
    return 0 if ok else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grouptop",
        description="certified verifications of set-family convergence "
                    "criteria",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run a named example suite")
    p_verify.add_argument("example",
                          choices=["sqrt7", "product", "interval",
                                   "fibonacci"])
    p_verify.add_argument("--gmax", type=int, default=50)
    p_verify.add_argument("--nmax", type=int, default=5)
    p_verify.add_argument("--cover-m0", type=int, default=0,
                          help="also verify the full-cover claim at this m0")
    p_verify.add_argument("--cover-gmax", type=int, default=20)
    p_verify.add_argument("--coords", type=int, default=6)
    p_verify.add_argument("--m0", type=int, nargs="+", default=[2, 3])
    p_verify.add_argument("--union-n", type=int, nargs="+", default=[1, 2])
    p_verify.add_argument("--samples", type=int, default=50)
    p_verify.add_argument("--seed", type=int, default=7)
    p_verify.add_argument("--min-exp", type=int, default=10)
    p_verify.add_argument("--n", type=int, default=20)
    _common_output(p_verify)
    p_verify.set_defaults(func=_cmd_verify)

    p_h = sub.add_parser("hausdorff",
                         help="run both criteria over a configured family")
    p_h.add_argument("config", help="JSON run configuration")
    _common_output(p_h)
    p_h.set_defaults(func=_cmd_hausdorff)

    p_hensel = sub.add_parser("hensel", help="square-root lifting table")
    p_hensel.add_argument("--p", type=int, default=3)
    p_hensel.add_argument("--a", type=int, default=7)
    p_hensel.add_argument("--k", type=int, default=3)
    _common_output(p_hensel)
    p_hensel.set_defaults(func=_cmd_hensel)

    p_re = sub.add_parser("recheck",
                          help="re-verify every witness in a report file")
    p_re.add_argument("report")
    p_re.set_defaults(func=_cmd_recheck)
    return parser


def _common_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=["json", "text"], default="json")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
