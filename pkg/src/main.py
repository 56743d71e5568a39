"""
Main application entry point for asympl.

This module provides the CLI interface: it loads a manifest, runs one
subcommand through the verification service and prints the report.

Exit codes:
    0  every requested check passed
    1  a check failed mathematically (or could not be decided)
    2  invalid input: parse, manifest, chart or dimension errors
"""

import argparse
import sys
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from src import expr
from src.config import Settings
from src.logging_config import LogContext, get_logger, setup_logging
from src.manifest import load_manifest
from src.models import GeometryError, PreconditionError
from src.report import Report
from src.verification_service import SUBCOMMANDS, RunOptions, VerificationService


# Load environment variables
load_dotenv()

EXIT_FAILED = 1
EXIT_INPUT = 2


def _names(value: Optional[str]) -> List[str]:
    return [part.strip() for part in value.split(",") if part.strip()] if value else []


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse command-line arguments.

    Returns:
        Parsed arguments
    """
    parser = argparse.ArgumentParser(
        prog="asympl",
        description="Symbolic verification of Hamiltonian structures on almost symplectic manifolds",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s lepage manifests/ex32.ini --form omega
  %(prog)s check-field manifests/ex33.ini --form theta --field X
  %(prog)s bracket manifests/ex31.ini --form omega --functions f,h
  %(prog)s lie manifests/heisenberg.ini --xi 1,0,0 --json
        """,
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS, help="Check or computation to run")
    parser.add_argument("manifest", type=str, help="Path to the manifest (INI) file")
    parser.add_argument("--form", type=str, help="Name of the 2-form (or base form)")
    parser.add_argument("--field", type=str, help="Name of a vector field")
    parser.add_argument("--fields", type=str, help="Comma-separated vector field names")
    parser.add_argument("--function", type=str, help="Name of a function")
    parser.add_argument("--functions", type=str, help="Comma-separated function names")
    parser.add_argument("--map", type=str, help="Name of the level-set parametrization")
    parser.add_argument("--quotient-map", type=str, help="Name of the map onto the quotient chart")
    parser.add_argument("--reduced-form", type=str, help="Name of the candidate reduced form")
    parser.add_argument("--metric", type=str, help="Name of the base metric")
    parser.add_argument("--connection", type=str, help="Name of the nonlinear connection")
    parser.add_argument("--tangent", type=str, help="Name of the tangent chart")
    parser.add_argument("--momentum", type=str, help="Name of the momentum section")
    parser.add_argument("--point", type=str, help="Comma-separated rational coordinates r1,...,rm")
    parser.add_argument("--xi", type=str, help="Comma-separated rational components of xi")
    parser.add_argument("--json", action="store_true", help="Emit the machine-readable report")
    parser.add_argument("--seed", type=int, help="Seed for sample points (overrides ASYMPL_SEED)")
    parser.add_argument("--log-level", type=str, help="Logging level (overrides LOG_LEVEL)")
    return parser.parse_args(argv)


def build_options(args: argparse.Namespace) -> RunOptions:
    return RunOptions(
        form=args.form,
        field=args.field,
        fields=_names(args.fields),
        function=args.function,
        functions=_names(args.functions),
        map=args.map,
        point=_names(args.point) if args.point else None,
        quotient_map=args.quotient_map,
        reduced_form=args.reduced_form,
        metric=args.metric,
        connection=args.connection,
        tangent=args.tangent,
        momentum=args.momentum,
        xi=_names(args.xi) if args.xi else None,
    )


def display_report(report: Report, as_json: bool) -> None:
    print(report.to_json() if as_json else report.to_text())


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main application entry point.

    Returns:
        Exit code (0 pass, 1 mathematical failure, 2 invalid input)
    """
    args = parse_arguments(argv)
    try:
        settings = Settings.from_env(seed=args.seed)
        if args.log_level:
            settings = Settings(**{**settings.model_dump(), "log_level": args.log_level})
    except ValidationError as e:
        print(f"\n❌ Invalid settings: {e}", file=sys.stderr)
        return EXIT_INPUT
    setup_logging(
        log_level=settings.log_level,
        log_dir=settings.log_dir,
        enable_console=True,
        enable_file=settings.log_to_file,
        json_format=settings.log_format == "json",
    )
    expr.configure(settings)
    logger = get_logger(__name__)

    try:
        manifest = load_manifest(args.manifest)
        service = VerificationService(manifest, settings)
        with LogContext(logger, args.subcommand, subcommand=args.subcommand) as ctx:
            report = service.run(args.subcommand, build_options(args))
        report.timing_ms = ctx.duration_ms
        display_report(report, args.json)
        logger.info(f"{args.subcommand}: {report.verdict}")
        return report.exit_code

    except PreconditionError as e:
        logger.warning(f"precondition failed: {e.message}")
        if e.verdict is not None:
            report = Report.from_verdicts(args.subcommand, [e.verdict])
            report.verdict = "fail"
            display_report(report, args.json)
        print(f"\n❌ {e}", file=sys.stderr)
        return EXIT_FAILED

    except GeometryError as e:
        logger.error(f"{args.subcommand} aborted: {e}")
        print(f"\n❌ {e}", file=sys.stderr)
        return EXIT_INPUT if e.is_input_error else EXIT_FAILED

    except KeyboardInterrupt:  # pragma: no cover
        logger.warning("cancelled by user (KeyboardInterrupt)")
        print("\n\nCancelled by user.", file=sys.stderr)
        return 130


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
