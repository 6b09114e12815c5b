"""Command line: ``explore``, ``prove`` and ``compare`` on SMT-LIB theory files."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from Agents.Exploreragent.explorer import (
    LEMMA_SUFFIX,
    ConfigError,
    ExplorerConfig,
    explore,
    prove_goals,
    subsumption_ratio,
)
from Agents.Parseragent.smtlib import ParseError, parse_lemmas, parse_theory, serialize_lemmas
from Agents.Rewriteagent.rewrite import DEFAULT_DEPTH, DEFAULT_NODE_CAP, DEFAULT_SPLIT_DEPTH
from Agents.Generationagent.sygue import DEFAULT_PLACEHOLDERS, DEFAULT_TERM_DEPTH
from Agents.Inferenceagent.soe import DEFAULT_EXAMPLE_DEPTH
from utils.file_utils import append_events

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_GOAL_FAILED = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_TIMEOUT = 4


def _placeholders(values: Sequence[str]) -> Tuple[int, Dict[str, int]]:
    count, overrides = DEFAULT_PLACEHOLDERS, {}
    for value in values:
        if "=" in value:
            sort, _, n = value.rpartition("=")
            overrides[sort.strip()] = int(n)
        else:
            count = int(value)
    return count, overrides


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-k", "--term-depth", type=int, default=DEFAULT_TERM_DEPTH)
    common.add_argument("-d", "--rw-depth", type=int, default=DEFAULT_DEPTH)
    common.add_argument("-c", "--example-depth", type=int, default=DEFAULT_EXAMPLE_DEPTH)
    common.add_argument("--split-depth", type=int, default=DEFAULT_SPLIT_DEPTH)
    common.add_argument(
        "--placeholders",
        action="append",
        default=[],
        metavar="N|SORT=N",
        help="placeholders per sort; repeat SORT=N for a single sort",
    )
    common.add_argument("--timeout", type=float, default=None, metavar="SECS")
    common.add_argument("--no-case-split", action="store_true")
    common.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    common.add_argument("--stats", type=Path, default=None, help="write run statistics as JSON")
    common.add_argument("--log", type=Path, default=None, help="append the discovery log as CSV")
    common.add_argument("--trace", action="store_true", help="rule, conjecture and proof traces")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="thesy", description="Lemma discovery for inductive theories")
    sub = parser.add_subparsers(dest="mode", required=True)
    p_explore = sub.add_parser("explore", parents=[common], help="discover lemmas")
    p_explore.add_argument("input", type=Path)
    p_explore.add_argument("--out", type=Path, default=None)
    p_prove = sub.add_parser("prove", parents=[common], help="prove the goals of a theory")
    p_prove.add_argument("input", type=Path)
    p_compare = sub.add_parser("compare", parents=[common], help="compare two lemma files")
    p_compare.add_argument("base", type=Path)
    p_compare.add_argument("a", type=Path)
    p_compare.add_argument("b", type=Path)
    return parser


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.trace else logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def config_from(args: argparse.Namespace) -> ExplorerConfig:
    count, overrides = _placeholders(args.placeholders)
    return ExplorerConfig.from_env(
        term_depth=args.term_depth,
        rw_depth=args.rw_depth,
        example_depth=args.example_depth,
        split_depth=args.split_depth,
        ph_count=count,
        ph_overrides=overrides,
        timeout=args.timeout,
        case_split=not args.no_case_split,
        node_cap=args.node_cap,
        trace=args.trace,
    )


def _write_stats(args: argparse.Namespace, stats: dict) -> None:
    if args.stats:
        args.stats.write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_log(args: argparse.Namespace, source: Path, events: List[dict]) -> None:
    if args.log:
        append_events(args.log, source.name, events)


def run_explore(args: argparse.Namespace, config: ExplorerConfig) -> int:
    theory = parse_theory(args.input.read_text(encoding="utf-8"))
    events: List[dict] = []
    lemmas, stats = explore(theory, config, events)
    out = args.out or args.input.with_name(args.input.name.removesuffix(".smt2") + LEMMA_SUFFIX)
    out.write_bytes(serialize_lemmas(lemma.equation for lemma in lemmas).encode("utf-8"))
    _write_stats(args, stats.to_dict())
    _write_log(args, args.input, events)
    logger.info("%d lemmas written to %s", len(lemmas), out)
    return EXIT_TIMEOUT if stats.truncated else EXIT_OK


def run_prove(args: argparse.Namespace, config: ExplorerConfig) -> int:
    theory = parse_theory(args.input.read_text(encoding="utf-8"))
    if not theory.goals:
        print(f"{args.input}: no goals to prove", file=sys.stderr)
        return EXIT_USAGE
    events: List[dict] = []
    results, stats = prove_goals(theory, config, events)
    for result in results:
        print(f"{'PROVED' if result.proved else 'FAILED'} {result.goal}")
    data = stats.to_dict()
    data["goals"] = [{"goal": r.goal, "proved": r.proved, "time": r.time} for r in results]
    _write_stats(args, data)
    _write_log(args, args.input, events)
    if all(r.proved for r in results):
        return EXIT_OK
    return EXIT_TIMEOUT if stats.truncated else EXIT_GOAL_FAILED


def run_compare(args: argparse.Namespace, config: ExplorerConfig) -> int:
    base = parse_theory(args.base.read_text(encoding="utf-8"))
    t_a = parse_lemmas(args.a.read_text(encoding="utf-8"), base)
    t_b = parse_lemmas(args.b.read_text(encoding="utf-8"), base)
    a_in_b = subsumption_ratio(t_a, t_b, base, config)
    b_in_a = subsumption_ratio(t_b, t_a, base, config)
    print(f"ratio A<B: {round(a_in_b, 4)} ratio B<A: {round(b_in_a, 4)}")
    _write_stats(args, {"a_in_b": a_in_b, "b_in_a": b_in_a})
    return EXIT_OK


MODES = {"explore": run_explore, "prove": run_prove, "compare": run_compare}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    configure_logging(args)
    try:
        config = config_from(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return MODES[args.mode](args, config)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
