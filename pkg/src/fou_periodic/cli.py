"""
Command-line front end.

Subcommands are registered with a decorator, in the same way the MCP tools
are; each handler receives the parsed namespace and returns a JSON-able
result that is printed on stdout. Errors are printed as JSON on stderr and
mapped to exit codes: 0 success, 1 usage, 2 numerical failure.
"""

import argparse
import logging
import sys
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any, NoReturn

from fou_periodic import __version__
from fou_periodic.config import ExperimentSpec, load_config, load_environment, threads_from_env
from fou_periodic.errors import EXIT_OK, FouError, UsageError
from fou_periodic.estimator import estimate
from fou_periodic.harness import (
    build_report,
    drift_from_spec,
    replication_path,
    run_limit_tests,
    run_mc,
)
from fou_periodic.process import read_path_csv, simulate_euler, write_fbm_csv, write_path_csv
from fou_periodic.utils import format_error, format_result, write_json

logger = logging.getLogger(__name__)

CommandHandler = Callable[[argparse.Namespace], Any]
Configure = Callable[[argparse.ArgumentParser], None]

PATH_FILE = "path.csv"
FBM_FILE = "fbm.csv"
ESTIMATE_FILE = "estimate.json"
REPORT_FILE = "report.json"


@dataclass
class CommandDefinition:
    """Container for a subcommand's definition and handler."""

    name: str
    help: str
    handler: CommandHandler
    configure: Configure | None = None


_command_registry: dict[str, CommandDefinition] = {}


def register_command(
    name: str, help: str, configure: Configure | None = None
) -> Callable[[CommandHandler], CommandHandler]:
    """Decorator to register a subcommand handler."""

    def decorator(func: CommandHandler) -> CommandHandler:
        _command_registry[name] = CommandDefinition(name, help, func, configure)
        return func

    return decorator


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting with status 2."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="Experiment config file (INI sections)")
    parser.add_argument("--out", type=Path, help="Output directory (default: [output] directory)")
    parser.add_argument("--seed", type=int, help="Override the base seed (unsigned 64-bit)")
    parser.add_argument("--threads", type=int, help="Worker threads (default: $FOU_THREADS or 1)")


def _load_spec(args: argparse.Namespace) -> ExperimentSpec:
    spec = load_config(args.config) if args.config else ExperimentSpec()
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise UsageError(f"--seed must be an unsigned 64-bit integer, got {args.seed}")
        spec = spec.model_copy(update={"mc": spec.mc.model_copy(update={"base_seed": args.seed})})
    return spec


def _out_dir(args: argparse.Namespace, spec: ExperimentSpec | None = None) -> Path:
    if args.out is not None:
        return args.out
    return Path(spec.output.directory if spec else ExperimentSpec().output.directory)


def _threads(args: argparse.Namespace) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError(f"--threads must be >= 1, got {args.threads}")
        return args.threads
    return threads_from_env(1)


# =============================================================================
# Subcommands
# =============================================================================


def _configure_simulate(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rep", type=int, default=0, help="Replication index of the path")
    parser.add_argument("--method", choices=["exact", "euler"], default="exact")


@register_command("simulate", "Simulate one path and dump t,X,BH,Z and t,BH as CSV", _configure_simulate)
def cmd_simulate(args: argparse.Namespace) -> Any:
    spec = _load_spec(args)
    path = replication_path(spec, args.rep)
    if args.method == "euler":
        path = simulate_euler(path.drift, path.alpha, path.bh)
    out = _out_dir(args, spec)
    target = write_path_csv(path, out / PATH_FILE)
    fbm_target = write_fbm_csv(path.bh, out / FBM_FILE)
    return {
        "path": str(target),
        "fbm": str(fbm_target),
        "n": path.n,
        "dt": path.dt,
        "alpha": path.alpha,
        "H": path.H,
        "method": path.method,
        "fbm_method": path.bh.method,
        "seed": spec.mc.base_seed,
        "rep": args.rep,
    }


def _configure_estimate(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--path", type=Path, help="Path CSV (default: <out>/path.csv)")
    parser.add_argument("--route", choices=["closed_form", "matrix_solve"], default=None)


@register_command("estimate", "Estimate theta from a path CSV at every configured horizon", _configure_estimate)
def cmd_estimate(args: argparse.Namespace) -> Any:
    spec = _load_spec(args)
    out = _out_dir(args, spec)
    source = args.path or out / PATH_FILE
    if not source.exists():
        raise UsageError(f"Path file not found: {source}; run `simulate` first")
    path = read_path_csv(source, drift_from_spec(spec), spec.model.alpha, spec.model.H)
    horizons = [n for n in spec.grid.horizons if n <= path.n] or [path.n]
    records = [
        estimate(path, n=n, route=args.route).to_record(seed=spec.mc.base_seed).model_dump()
        for n in horizons
    ]
    write_json(out / ESTIMATE_FILE, records)
    return records


@register_command("mc", "Run the Monte Carlo replication sweep")
def cmd_mc(args: argparse.Namespace) -> Any:
    spec = _load_spec(args)
    result = run_mc(spec, _out_dir(args, spec), _threads(args))
    return result.summary


@register_command("limits", "Run limit-law KS tests on a finished mc run")
def cmd_limits(args: argparse.Namespace) -> Any:
    spec = load_config(args.config) if args.config else None
    return run_limit_tests(_out_dir(args, spec), _threads(args), args.seed)


@register_command("report", "Aggregate results.csv into medians, rate slope and trend")
def cmd_report(args: argparse.Namespace) -> Any:
    spec = load_config(args.config) if args.config else None
    out = _out_dir(args, spec)
    report = build_report(out)
    write_json(out / REPORT_FILE, report)
    return report


# =============================================================================
# Entry point
# =============================================================================


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fou", description="fOU process with periodic mean: simulation and inference")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--env-file", type=str, help="Path to a .env file")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for definition in _command_registry.values():
        cmd = sub.add_parser(definition.name, help=definition.help)
        _common(cmd)
        if definition.configure:
            definition.configure(cmd)
    return parser


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
        _setup_logging(args.verbose)
        load_environment(args.env_file)
        result = _command_registry[args.command].handler(args)
    except FouError as e:
        print(format_error(e), file=sys.stderr)
        return e.exit_code
    print(format_result(result))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
