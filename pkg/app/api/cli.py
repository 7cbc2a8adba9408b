import argparse
import logging
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional

from colorama import Fore, Style

from app.core.exceptions import CogPilotError, ConfigValidationError
from app.models.config import ExperimentConfig
from app.models.results import ResultTable
from app.services.experiments import default_workers, run_mse_sweep, run_optimize, run_rate_sweep
from app.services.presets import list_presets, load_preset, resolve_config
from app.services.results_io import emit_csv, version_string, write_sidecar
from app.services.run_ledger import get_run, list_runs, record_run

# Configure logging
logger = logging.getLogger(__name__)

Runner = Callable[[ExperimentConfig, Optional[int]], ResultTable]

RUNNERS: Dict[str, Runner] = {
    "mse-sweep": run_mse_sweep,
    "rate-sweep": run_rate_sweep,
    "optimize": run_optimize,
}

DEFAULT_RESULTS_DIR = Path("results")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogpilot",
        description="Pilot-assisted channel estimation and training optimization "
        "for cognitive radio under imperfect sensing",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    for command, help_text in (
        ("mse-sweep", "Channel-estimation MSE versus a swept parameter"),
        ("rate-sweep", "Achievable rates versus a swept parameter"),
        ("optimize", "Grid search for the rate-maximizing M, mu0 and mu1"),
    ):
        sub = subparsers.add_parser(command, help=help_text)
        source = sub.add_mutually_exclusive_group()
        source.add_argument("--config", help="Path to a JSON experiment config")
        source.add_argument("--preset", help="Name of a shipped preset (see 'presets')")
        sub.add_argument("--seed", type=_seed, help="Random seed (unsigned 64-bit)")
        sub.add_argument("--trials", type=_positive, help="Monte Carlo trials per point")
        sub.add_argument("--out", help="CSV output path")
        sub.add_argument("--workers", type=_positive, help="Worker processes")
        sub.add_argument(
            "--no-ledger", action="store_true", help="Do not record this run in the run ledger"
        )

    subparsers.add_parser("presets", help="List shipped presets")

    history = subparsers.add_parser("history", help="Show recorded runs")
    history.add_argument("--limit", type=_positive, default=10)
    history.add_argument("--offset", type=int, default=0)
    history.add_argument("--command", dest="filter_command", choices=sorted(RUNNERS))
    history.add_argument("--id", dest="run_id", type=int, help="Show one run in full")
    return parser


def _output_path(config: ExperimentConfig) -> Path:
    if config.output_path:
        return Path(config.output_path)
    return DEFAULT_RESULTS_DIR / f"{config.name}.csv"


def _print_optima(table: ResultTable) -> None:
    for row in table.where(record="optimum").rows:
        cells = dict(zip(table.columns, row))
        print(
            f"  {Fore.CYAN}{cells['input']}{Style.RESET_ALL}: "
            f"M*={int(cells['m'])}  mu0*={float(cells['mu0']):.2f}  "
            f"mu1*={float(cells['mu1']):.2f}  "
            f"rate={float(cells['rate']):.4f} ± {float(cells['std_error']):.4f} bits/symbol"
        )


def run_experiment(args: argparse.Namespace) -> int:
    config = resolve_config(
        preset=args.preset,
        config_path=args.config,
        seed=args.seed,
        trials=args.trials,
        output_path=args.out,
    )
    if args.preset:
        preset_command = load_preset(args.preset).command
        if preset_command and preset_command != args.command:
            logger.warning(
                f"Preset '{args.preset}' is meant for '{preset_command}', running '{args.command}'"
            )
    workers = args.workers or default_workers()
    logger.info(
        f"Running {args.command} '{config.name}' (seed={config.seed}, trials={config.trials}, "
        f"workers={workers})"
    )

    started = time.perf_counter()
    table = RUNNERS[args.command](config, workers)
    elapsed = time.perf_counter() - started

    path = emit_csv(table, _output_path(config))
    version = version_string()
    write_sidecar(
        config,
        path,
        args.command,
        extra={"preset": args.preset, "workers": workers, "rows": len(table.rows)},
    )
    if not args.no_ledger:
        record_run(
            command=args.command,
            config=config,
            version=version,
            rows=len(table.rows),
            elapsed_s=elapsed,
            workers=workers,
            preset=args.preset,
            output_path=str(path),
        )

    print(
        f"{Fore.GREEN}✓{Style.RESET_ALL} {args.command} '{config.name}': "
        f"{len(table.rows)} rows in {elapsed:.1f}s → {path}"
    )
    if args.command == "optimize":
        _print_optima(table)
    return EXIT_OK


def show_presets(args: argparse.Namespace) -> int:
    for preset in list_presets():
        print(
            f"{Fore.CYAN}{preset.name:<18}{Style.RESET_ALL} {preset.command:<11} "
            f"{preset.description}"
        )
    return EXIT_OK


def show_history(args: argparse.Namespace) -> int:
    if args.run_id is not None:
        details = get_run(args.run_id)
        if details is None:
            print(f"{Fore.YELLOW}No run with id {args.run_id}{Style.RESET_ALL}")
            return EXIT_FAILURE
        for key, value in details.items():
            print(f"{key:>12}: {value}")
        return EXIT_OK

    page = list_runs(limit=args.limit, offset=args.offset, command=args.filter_command)
    print(f"{page['total']} recorded run(s)")
    for item in page["items"]:
        print(
            f"{Fore.CYAN}#{item['id']:<5}{Style.RESET_ALL} {item['created_at']}  "
            f"{item['command']:<11} {item['preset'] or '-':<16} seed={item['seed']} "
            f"trials={item['trials']} rows={item['rows']} {item['elapsed_s']:.1f}s"
        )
    return EXIT_OK


HANDLERS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "presets": show_presets,
    "history": show_history,
    **{command: run_experiment for command in RUNNERS},
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except ConfigValidationError as e:
        logger.error(f"Configuration error: {str(e)}")
        print(f"{Fore.RED}Configuration error:{Style.RESET_ALL} {e}")
        return EXIT_CONFIG
    except CogPilotError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        print(f"{Fore.RED}Error:{Style.RESET_ALL} {e}")
        return EXIT_FAILURE
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {str(e)}", exc_info=True)
        print(f"{Fore.RED}Unexpected error:{Style.RESET_ALL} {e}")
        return EXIT_FAILURE
