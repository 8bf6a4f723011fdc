#!/usr/bin/env python3
"""
Command-line driver for simulations, theory curves, oracle checks and figure reproduction.

Usage:
    treeld theory    [options]     prediction and competing bounds per n
    treeld simulate  [options]     Monte Carlo error rates with Wilson intervals
    treeld oracle    [--quick]     closed forms against independent computations
    treeld reproduce --figure ID   CSV files of one figure (--list shows the registry)
    treeld exact     [options]     exact 3-chain error probabilities (n <= 20)
    treeld tree      [options]     text form, zeta and DOT of a structure
    treeld sample    [options]     hex dump of one sample batch
    treeld learn     --samples F   learned tree of a hex dump

Examples:
    treeld theory --structure star --theta 0.4 --n 200 400 800
    treeld simulate --structure p3 --theta 0.1 --n 100 --workers 4 --out results
    treeld reproduce --figure fig3a --out results --max-trials 1000000
    treeld sample --structure star --p 5 --theta 0.2 --n 500 --seed 3 --out star5.hex
    treeld learn --samples star5.hex --p 5 --truth star
    treeld --log-level DEBUG oracle --quick

CSV goes to stdout unless --out DIR is given; logs go to stderr. Exit code 2 means invalid
arguments, 1 means a failed oracle check.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence

import pandas as pd

from .checks import run_oracle_suite
from .config import ExperimentConfig
from .experiments import (
    FIGURES,
    exact_p3_frame,
    figure_table,
    reproduce,
    run_simulation,
    run_theory,
)
from .learner import EdgeWeight, TiePolicy, learn_mwst, structure_error
from .logutil import configure_logging
from .oracle import MAX_EXACT_P3_N
from .reporting import frame_to_csv, reports_to_frame, write_csv
from .sampling import apply_bsc, pair_stats, read_batch, sample_batch, write_batch
from .tree_model import STRUCTURES

_logger = logging.getLogger("treeld.cli")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def _add_experiment_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON file with ExperimentConfig keys")
    parser.add_argument("--structure", choices=STRUCTURES, help="Named structure (default: p3)")
    parser.add_argument("--tree-file", help="Tree text file; overrides --structure")
    parser.add_argument("--p", type=int, help="Vertex count for star and chain (default: 10)")
    parser.add_argument("--theta", type=float, help="Edge flip probability in (0, 0.5)")
    parser.add_argument("--q", type=float, help="BSC crossover probability in [0, 0.5)")
    parser.add_argument("--n", type=int, nargs="+", help="Sample sizes")
    parser.add_argument("--weight", choices=[w.value for w in EdgeWeight], help="Edge weight rule")
    parser.add_argument("--policy", choices=[p.value for p in TiePolicy], help="Tie policy")
    parser.add_argument("--seed", type=int, help="Master seed (default: 0)")
    parser.add_argument("--min-errors", type=int, help="Stop after this many errors (default: 200)")
    parser.add_argument("--max-trials", type=int, help="Trial budget per n (default: 1e8)")
    parser.add_argument(
        "--workers", type=int, help="Worker processes (default: TREELD_WORKERS or 1)"
    )
    parser.add_argument("--out", type=Path, help="Output directory (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treeld",
        description="Learn Ising tree structures and check their error asymptotics",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("Examples:", 1)[1] if __doc__ else None,
    )
    parser.add_argument(
        "--log-level", default="INFO", help="Logging level on stderr (default: %(default)s)"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("theory", "Predicted error probability, BK and NKS bounds per n"),
        ("simulate", "Monte Carlo error probability per n"),
    ):
        _add_experiment_options(commands.add_parser(name, help=text))

    oracle = commands.add_parser("oracle", help="Run the oracle suite; exit 1 on any failure")
    oracle.add_argument("--quick", action="store_true", help="Smaller enumeration ranges")
    oracle.add_argument("--out", type=Path, help="Directory for oracle.json")

    figures = commands.add_parser("reproduce", help="Write the CSV files of one figure")
    _add_experiment_options(figures)
    figures.add_argument("--figure", help=f"One of {', '.join(FIGURES)}")
    figures.add_argument("--theory-only", action="store_true", help="Skip the Monte Carlo curves")
    figures.add_argument("--list", action="store_true", help="Print the figure registry as JSON")

    exact = commands.add_parser("exact", help="Exact error probability on the 3-chain")
    exact.add_argument("--theta", type=float, default=0.1)
    exact.add_argument("--q", type=float, default=0.0)
    exact.add_argument("--policy", choices=[p.value for p in TiePolicy], default="random")
    exact.add_argument(
        "--n", type=int, nargs="+", default=list(range(1, 13)), help=f"Sizes <= {MAX_EXACT_P3_N}"
    )
    exact.add_argument("--out", type=Path, help="Output directory (default: stdout)")

    tree = commands.add_parser("tree", help="Describe a tree structure")
    tree.add_argument("--structure", choices=STRUCTURES, default="star")
    tree.add_argument("--tree-file", help="Tree text file; overrides --structure")
    tree.add_argument("--p", type=int, default=10)
    tree.add_argument("--format", choices=["text", "json", "dot"], default="text")

    sample = commands.add_parser("sample", help="Draw one batch and write it as a hex dump")
    sample.add_argument("--structure", choices=STRUCTURES, default="p3")
    sample.add_argument("--tree-file", help="Tree text file; overrides --structure")
    sample.add_argument("--p", type=int, default=10)
    sample.add_argument("--theta", type=float, required=True)
    sample.add_argument("--q", type=float, default=0.0, help="BSC crossover applied after sampling")
    sample.add_argument("--n", type=int, required=True, help="Number of samples")
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--out", type=Path, help="Hex dump file (default: stdout)")

    learn = commands.add_parser("learn", help="Learn a tree from a hex dump")
    learn.add_argument("--samples", type=Path, required=True, help="Hex dump, one sample per line")
    learn.add_argument("--p", type=int, required=True, help="Number of variables in the dump")
    learn.add_argument("--weight", choices=[w.value for w in EdgeWeight], default="agreement")
    learn.add_argument("--policy", choices=[p.value for p in TiePolicy], default="random")
    learn.add_argument("--seed", type=int, default=0, help="Seed of the random tie order")
    learn.add_argument("--truth", help="Structure name or tree file to score against")
    return parser


def _file_values(args: argparse.Namespace) -> Dict[str, Any]:
    return ExperimentConfig.read_values(args.config) if args.config else {}


def config_from_args(
    args: argparse.Namespace, values: Optional[Dict[str, Any]] = None
) -> ExperimentConfig:
    """Config file (if any) first, then every flag that was given."""
    base = ExperimentConfig.from_dict(_file_values(args) if values is None else values)
    return base.with_overrides(
        structure=args.tree_file or args.structure,
        p=args.p,
        theta=args.theta,
        q=args.q,
        n_list=tuple(args.n) if args.n else None,
        weight=args.weight,
        policy=args.policy,
        seed=args.seed,
        min_errors=args.min_errors,
        max_trials=args.max_trials,
        workers=args.workers,
        output=args.out,
    )


def _emit(frame: pd.DataFrame, out: Optional[Path], filename: str) -> None:
    if out is None:
        sys.stdout.write(frame_to_csv(frame))
    else:
        write_csv(frame, Path(out) / filename)


def cmd_theory(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    _emit(run_theory(cfg), cfg.output, "theory.csv")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    _emit(reports_to_frame(run_simulation(cfg)), cfg.output, "simulation.csv")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    summary = run_oracle_suite(quick=args.quick)
    payload = json.dumps(summary.to_dict(), indent=2)
    if args.out is None:
        sys.stdout.write(payload + "\n")
    else:
        target = Path(args.out) / "oracle.json"
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(payload + "\n", encoding="utf-8")
        _logger.info("Oracle report written | path=%s", target)
    for record in summary.failures:
        print(
            f"FAILED {record.name} inputs={record.inputs} expected={record.expected!r} "
            f"actual={record.actual!r} delta={record.delta:.3g} tolerance={record.tolerance:g}",
            file=sys.stderr,
        )
    return EXIT_OK if summary.passed else EXIT_CHECK_FAILED


def cmd_reproduce(args: argparse.Namespace) -> int:
    if args.list:
        print(json.dumps(figure_table(), indent=2))
        return EXIT_OK
    if args.figure is None:
        raise ValueError(f"--figure is required; one of {', '.join(FIGURES)}")
    values = _file_values(args)
    cfg = config_from_args(args, values)
    # the figure's own sizes apply unless --n or the config file names some
    sizes = cfg.n_list if args.n or "n_list" in values else None
    out = cfg.output or Path("results")
    paths = reproduce(args.figure, out, base=cfg, n_list=sizes, simulate=not args.theory_only)
    for path in paths:
        print(path)
    return EXIT_OK


def cmd_exact(args: argparse.Namespace) -> int:
    _emit(exact_p3_frame(args.theta, args.q, args.policy, args.n), args.out, "exact_p3.csv")
    return EXIT_OK


def cmd_tree(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig(structure=args.tree_file or args.structure, p=args.p)
    tree = cfg.build_tree()
    if args.format == "json":
        print(tree.to_json())
    elif args.format == "dot":
        print(tree.to_dot())
    else:
        info = tree.to_dict()["metadata"]
        print(f"text:   {info['text']}")
        print(f"p:      {info['p']}")
        print(f"zeta:   {info['zeta']}")
        print(f"star:   {tree.is_star()}")
        print(f"chain:  {tree.is_chain()}")
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    tree = ExperimentConfig(structure=args.tree_file or args.structure, p=args.p).build_tree()
    batch = apply_bsc(sample_batch(tree, args.theta, args.n, args.seed), args.q, args.seed)
    if args.out is None:
        sys.stdout.write("\n".join(batch.to_hex_lines()) + "\n")
    else:
        write_batch(batch, args.out)
    return EXIT_OK


def cmd_learn(args: argparse.Namespace) -> int:
    stats = pair_stats(read_batch(args.samples, args.p))
    result = learn_mwst(stats, args.weight, args.policy, args.seed)
    payload: Dict[str, Any] = {
        "n": stats.n,
        "tree": result.edges.to_text(),
        "tie_encountered": result.tie_encountered,
        "declared_error": result.declared_error,
        "edges": [
            {"edge": [i + 1, j + 1], "disagreement_rate": stats.disagreement_rate(i, j)}
            for i, j in result.edges.sorted_edges
        ],
    }
    if args.truth:
        truth = ExperimentConfig(structure=args.truth, p=args.p).build_tree()
        payload["truth"] = truth.to_text()
        payload["error"] = structure_error(result, truth)
    print(json.dumps(payload, indent=2))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "theory": cmd_theory,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
    "reproduce": cmd_reproduce,
    "exact": cmd_exact,
    "tree": cmd_tree,
    "sample": cmd_sample,
    "learn": cmd_learn,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv`` and run one subcommand; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(list(argv) if argv is not None else None)
    try:
        configure_logging(args.log_level)
        return COMMANDS[args.command](args)
    except ValueError as exc:
        _logger.debug("Invalid arguments", exc_info=True)
        print(f"treeld: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
