"""Command line entry point.

Exit codes: 0 every row passes, 1 usage or config error, 2 a hypothesis
checker failed, 3 some row failed its bound, 4 file I/O error.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from sublaw.cli.config import (ConfigParseError, ConfigValidationError, ExperimentConfig,
                               load_config, parse_config_text)
from sublaw.cli.reporting import all_pass, emit
from sublaw.cli.runner import run_experiment
from sublaw.errors import HypothesisUnmet

EXIT_OK, EXIT_USAGE, EXIT_HYPOTHESIS, EXIT_VIOLATION, EXIT_IO = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sublaw", description="Sublinear expectation experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (("run", "run one experiment config"),
                       ("verify", "run configs and check their expected exit codes "
                                  "(all shipped configs when --config is omitted)"),
                       ("oracle", "exact upper/lower expectations and Choquet integrals "
                                  "for the expressions in a config")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", required=name != "verify", help="YAML config path")
        s.add_argument("--seed", type=int, help="override the config seed")
        s.add_argument("--out", help="output file (default: config output.path or stdout)")
        s.add_argument("--format", choices=("csv", "json"), help="output format")
    return p


def shipped_configs() -> list[tuple[str, str]]:
    """(name, text) of every config bundled with the package."""
    root = resources.files("sublaw.configs")
    return sorted((e.name, e.read_text(encoding="utf-8")) for e in root.iterdir()
                  if e.name.endswith(".yaml"))


def execute(cfg: ExperimentConfig, out: Optional[str], fmt: Optional[str],
            stdout=None) -> int:
    """Run ``cfg`` and write its rows; returns the exit code."""
    stdout = stdout or sys.stdout
    try:
        rows = run_experiment(cfg)
    except HypothesisUnmet as exc:
        print(f"hypothesis unmet: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    text = emit(rows, fmt or cfg.output_format)
    target = out or cfg.output_path
    if target is None:
        stdout.write(text)
    else:
        try:
            Path(target).write_text(text, encoding="utf-8", newline="")
        except OSError as exc:
            print(f"cannot write {target}: {exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK if all_pass(rows) else EXIT_VIOLATION


def _verify(args) -> int:
    if args.config:
        items = [(args.config, Path(args.config).read_text(encoding="utf-8"))]
    else:
        items = shipped_configs()
    worst = EXIT_OK
    for name, text in items:
        cfg = parse_config_text(text, name)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        code = execute(cfg, None, args.format, stdout=_Null())
        ok = code == cfg.expect_exit
        print(f"{'PASS' if ok else 'FAIL'} {name}: exit {code}, expected {cfg.expect_exit}")
        if not ok:
            worst = max(worst, code if code != EXIT_OK else EXIT_VIOLATION)
    return worst


class _Null:
    def write(self, _):
        pass


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _verify(args)
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        if args.command == "oracle" and cfg.experiment != "oracle":
            cfg = ExperimentConfig(**{**cfg.__dict__, "experiment": "oracle"})
        return execute(cfg, args.out, args.format)
    except (ConfigParseError, ConfigValidationError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
