"""Command-line front end: prove the queries of one or more program files.

Exit status: 0 when every query is Valid, 1 when some query is Unknown or timed
out, 2 on usage or parse errors, 3 when the oracle finds a counter-model to a
Valid verdict.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import pure
from . import syntax as S
from .engine import RuleConfig, SearchBudget, prove
from .parser import ParseError, parse_program
from .pure import SolverConfig, SolverConfigError
from .report import (
    NO_COUNTER_MODEL, NOT_REFUTED, REFUTED, TIMEOUT, UNKNOWN, VALID, VIOLATION,
    OracleCheck, RunReport, emit_report, summary, tree_counts, tree_payload,
)
from .semantics import Bounds, find_counter_model

EXIT_OK, EXIT_UNPROVED, EXIT_USAGE, EXIT_UNSOUND = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    timeout_ms: int = 30000
    max_induction: int = 3
    max_unfold: int = 8
    single_path: bool = False
    strict_rules: bool = False
    check_oracle: int | None = None
    oracle_ints: tuple = (-1, 1)
    refute: bool = True
    pure_solver: str = "internal"
    trace: bool = False

    def budget(self) -> SearchBudget:
        return SearchBudget(timeout_ms=self.timeout_ms, max_induction_apps=self.max_induction,
                            max_right_unfolds=self.max_unfold, mutual_mode=not self.single_path)

    def rules(self) -> RuleConfig:
        return RuleConfig(solver=SolverConfig.parse(self.pure_solver), strict_rules=self.strict_rules)

    def bounds(self) -> Bounds:
        k = self.check_oracle
        return Bounds(max_heap_size=k, loc_count=max(k, 1), int_range=self.oracle_ints)


def run_query(path: str, text: str, index: int, cfg: RunConfig) -> RunReport:
    """Prove query ``index`` of a program.  The program is parsed afresh with
    restarted variable numbering so reports do not depend on earlier queries."""
    S.restart_ids()
    pure.clear_cache()
    prog = parse_program(text)
    name, ent = prog.queries[index]
    t0 = time.monotonic()
    res = prove(None, (), ent, prog.preds, cfg.budget(), cfg.rules())
    ms = int((time.monotonic() - t0) * 1000)
    verdict = VALID if res.valid else (TIMEOUT if res.timed_out else UNKNOWN)
    rep = RunReport(
        file=path, name=name, verdict=verdict, wall_ms=ms,
        mode="single-path" if cfg.single_path else "mutual",
        entailment=S.show_entailment(ent),
        rule_counts=tree_counts(res.tree),
        attempts=res.stats.to_json()["attempts"],
        nodes_explored=res.stats.nodes,
        hypotheses_recorded=res.stats.hypotheses_recorded,
        hypotheses_applied=res.tree.rule_counts().get("Hypo", 0) if res.tree else 0,
    )
    if res.tree is not None:
        rep.tree, rep.tree_text = tree_payload(res.tree)
    if cfg.check_oracle is not None and (res.valid or cfg.refute):
        b = cfg.bounds()
        cm = find_counter_model(ent, prog.preds, b)
        if res.valid:
            status = VIOLATION if cm is not None else NO_COUNTER_MODEL
        else:
            status = REFUTED if cm is not None else NOT_REFUTED
        rep.oracle = OracleCheck(b.describe(), status, cm.to_json() if cm else None, cm.render() if cm else None)
    return rep


def _run_job(job):
    return run_query(*job)


def run(files: list[tuple[str, str]], cfg: RunConfig, jobs: int = 1) -> list[RunReport]:
    """Reports for every query of every ``(path, text)`` pair, in input order."""
    work = []
    for path, text in files:
        prog = parse_program(text)
        work.extend((path, text, i, cfg) for i in range(len(prog.queries)))
    if jobs <= 1 or len(work) <= 1:
        return [run_query(*w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_job, work))


def exit_code(reports: list[RunReport]) -> int:
    if any(r.violation for r in reports):
        return EXIT_UNSOUND
    if any(r.verdict != VALID for r in reports):
        return EXIT_UNPROVED
    return EXIT_OK


def _positive(s: str) -> int:
    v = int(s)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _int_range(s: str) -> tuple:
    try:
        lo, hi = (int(x) for x in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO,HI") from None
    if lo > hi:
        raise argparse.ArgumentTypeError("empty range")
    return (lo, hi)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slprove", description="Prove separation-logic entailments by mutual induction.")
    ap.add_argument("files", nargs="+", help="program files ('-' reads standard input)")
    ap.add_argument("--timeout-ms", type=_positive, default=30000)
    ap.add_argument("--max-induction", type=_positive, default=3, help="Induction steps per path")
    ap.add_argument("--max-unfold", type=_positive, default=8, help="PredIntroRight steps per path")
    ap.add_argument("--single-path", action="store_true", help="use only hypotheses from the current path")
    ap.add_argument("--strict-rules", action="store_true", help="syntactic FalseLeft1 only")
    ap.add_argument("--check-oracle", type=int, metavar="K", help="search counter-models with heaps up to K cells")
    ap.add_argument("--oracle-ints", type=_int_range, default=(-1, 1), metavar="LO,HI")
    ap.add_argument("--no-refute", action="store_true", help="do not search counter-models for unproved queries")
    ap.add_argument("--trace", action="store_true", help="append proof trees")
    ap.add_argument("--format", choices=("text", "json"), default="text")
    ap.add_argument("--pure-solver", default="internal", help="internal | cmd:<template>")
    ap.add_argument("--summary", action="store_true", help="print 'proved N / total M' per file")
    ap.add_argument("--jobs", type=_positive, default=1, help="worker processes")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if args.check_oracle is not None and args.check_oracle < 0:
        print("slprove: --check-oracle must be nonnegative", file=sys.stderr)
        return EXIT_USAGE
    try:
        SolverConfig.parse(args.pure_solver)
    except SolverConfigError as e:
        print(f"slprove: {e}", file=sys.stderr)
        return EXIT_USAGE
    cfg = RunConfig(
        timeout_ms=args.timeout_ms, max_induction=args.max_induction, max_unfold=args.max_unfold,
        single_path=args.single_path, strict_rules=args.strict_rules, check_oracle=args.check_oracle,
        oracle_ints=args.oracle_ints, refute=not args.no_refute, pure_solver=args.pure_solver,
        trace=args.trace,
    )
    files = []
    for path in args.files:
        try:
            text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
            parse_program(text)
        except OSError as e:
            print(f"slprove: {e}", file=sys.stderr)
            return EXIT_USAGE
        except ParseError as e:
            print(f"slprove: {path}: {e}", file=sys.stderr)
            return EXIT_USAGE
        files.append((path, text))
    try:
        reports = run(files, cfg, args.jobs)
    except SolverConfigError as e:
        print(f"slprove: {e}", file=sys.stderr)
        return EXIT_USAGE
    out = summary(reports) if args.summary else emit_report(reports, args.format, args.trace)
    if out:
        try:
            print(out)
        except BrokenPipeError:
            sys.stderr.close()
    return exit_code(reports)


if __name__ == "__main__":
    sys.exit(main())
