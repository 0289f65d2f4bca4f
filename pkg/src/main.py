"""
Main entry point for the sep-qmm command line.
"""
import argparse
import os
import sys
from pathlib import Path
from typing import List, Optional

import yaml
from dotenv import load_dotenv
from loguru import logger
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.commands import CommandOutput, ExitCode, RunConfig, command_registry, kernel_choice, register_all_commands

DEFAULT_CONFIG_PATH = "./config/config.yaml"

console = Console()


def setup_logging(log_dir: str = "./logs", level: str = "INFO"):
    """
    Setup logging configuration.

    Args:
        log_dir: Directory for log files
        level: Minimum level on stderr and in the log file
    """
    log_path = Path(log_dir)
    log_path.mkdir(parents=True, exist_ok=True)

    logger.remove()
    logger.add(sys.stderr, level=level)
    logger.add(
        log_path / "sep_qmm_{time}.log",
        rotation="100 MB",
        retention="10 days",
        level=level
    )
    logger.info("Logging initialized")


def load_config(config_path: str = DEFAULT_CONFIG_PATH) -> dict:
    """
    Load configuration from YAML file.

    Args:
        config_path: Path to config file

    Returns:
        Configuration dictionary
    """
    try:
        with open(config_path, 'r') as f:
            config = yaml.safe_load(f) or {}
        logger.info(f"Configuration loaded from {config_path}")
        return config
    except Exception as e:
        logger.warning(f"Could not load config from {config_path}: {e}")
        return get_default_config()


def get_default_config() -> dict:
    """
    Get default configuration.

    Returns:
        Default configuration dictionary
    """
    return RunConfig().model_dump(mode="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sep-qmm",
        description="Bayesian quantile mixed models with SEP and skew-Laplace errors for censored longitudinal data.",
    )
    parser.add_argument("command", choices=command_registry.names(), help="command to run")
    parser.add_argument("--data", help="input CSV (subject_id,time,response,censor,bound2,covariates...)")
    parser.add_argument("--config", help="YAML config file (default: $SEP_QMM_CONFIG or ./config/config.yaml)")
    parser.add_argument("--quantiles", help="comma-separated quantile levels, e.g. 0.1,0.5,0.9")
    parser.add_argument("--kernel", choices=["sl", "sep", "both"], help="error kernel(s) to fit")
    parser.add_argument("--seed", type=int, help="root random seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--workers", type=int, help="maximum concurrent processes")
    parser.add_argument("--full-scale", action="store_true", default=None,
                        help="run the simulation study with 300 replicates per scenario")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then command-line flags."""
    path = args.config or os.getenv("SEP_QMM_CONFIG", DEFAULT_CONFIG_PATH)
    base = RunConfig.model_validate(load_config(path))
    quantiles = [float(q) for q in args.quantiles.split(",")] if args.quantiles else None
    return base.with_overrides(
        data=args.data,
        quantiles=quantiles,
        kernels=kernel_choice(args.kernel) if args.kernel else None,
        seed=args.seed,
        out=args.out,
        workers=args.workers,
        full_scale=args.full_scale,
    )


def print_output(name: str, output: CommandOutput) -> None:
    """Render a command's summary table and file list."""
    if not output.success:
        console.print(f"[bold red]{name} failed:[/bold red] {output.error}")
        return
    rows = (output.result or {}).get("table") or []
    if rows:
        table = Table(title=name)
        for column in rows[0]:
            table.add_column(str(column))
        for row in rows:
            table.add_row(*[f"{v:.4g}" if isinstance(v, float) else str(v) for v in row.values()])
        console.print(table)
    for path in (output.result or {}).get("files", []):
        console.print(f"  wrote {path}")
    if output.exit_code == ExitCode.CONVERGENCE:
        console.print("[yellow]Convergence warning: see the convergence reports[/yellow]")


def main(argv: Optional[List[str]] = None):
    """Main entry point."""
    try:
        # Load environment variables
        load_dotenv()

        register_all_commands()
        args = build_parser().parse_args(argv)

        try:
            config = resolve_config(args)
        except ValidationError as e:
            logger.error(f"Invalid configuration: {e}")
            sys.exit(ExitCode.FAILURE)

        setup_logging(config.logging.directory, config.logging.level)
        logger.info(f"Running '{args.command}' (seed {config.seed}, workers {config.workers})")

        output = command_registry.execute_command(args.command, config)
        print_output(args.command, output)
        sys.exit(int(output.exit_code))

    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        sys.exit(130)


if __name__ == "__main__":
    main()
