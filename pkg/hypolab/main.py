"""
Command-line entry point for the hypolab workbench.

    hypolab run <experiment> [--config file] [--key value ...]
    hypolab list
    hypolab verify <report.json>
"""

import argparse
import sys
from typing import Dict, List, Optional

from pydantic import ValidationError

from hypolab.core.config import settings
from hypolab.core.exceptions import ConfigError, HypolabError
from hypolab.core.logging import logger, setup_logging
from hypolab.services.experiment_service import ExperimentService

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.app_name,
        description="Numerical and symbolic workbench for hypoelliptic operators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser(
        "run",
        allow_abbrev=False,
        help="run one experiment; extra --key value pairs override the config",
    )
    run.add_argument("experiment")
    run.add_argument("--config", help="flat KEY=value configuration file")
    run.add_argument("--threads", type=int, help="cap on internal parallelism")
    run.add_argument("--output-dir", help=f"output root (default {settings.output_dir})")
    run.add_argument("--log-level", default=settings.log_level)

    sub.add_parser("list", help="list experiments and the claims they check")

    verify = sub.add_parser("verify", help="re-check a stored report against its tables and manifest")
    verify.add_argument("report")
    verify.add_argument("--log-level", default=settings.log_level)
    return parser


def parse_overrides(extra: List[str]) -> Dict[str, str]:
    """
    Turn trailing `--key value` (or `--key=value`) tokens into a mapping.

    Raises:
        ConfigError: On a dangling key or a bare value
    """
    overrides: Dict[str, str] = {}
    tokens = list(extra)
    while tokens:
        token = tokens.pop(0)
        if not token.startswith("--") or token == "--":
            raise ConfigError(f"unexpected argument {token!r}; overrides are --key value")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        elif tokens and not tokens[0].startswith("--"):
            value = tokens.pop(0)
        else:
            raise ConfigError(f"override --{key} needs a value")
        overrides[key] = value
    return overrides


def _run(args: argparse.Namespace, extra: List[str]) -> int:
    service = ExperimentService()
    overrides = parse_overrides(extra)
    if args.threads is not None:
        overrides["threads"] = str(args.threads)
    if args.output_dir:
        overrides["output_dir"] = args.output_dir
    cfg = service.load_config(args.experiment, args.config, overrides)
    report, directory = service.run(cfg)

    for check in report.checks:
        status = "pass" if check.passed else "FAIL"
        print(f"  [{status}] {check.name}: {check.value:.6g} {check.op.value} {check.threshold:g}")
    print(f"{report.experiment}: {'PASS' if report.passed else 'FAIL'} -> {directory}")
    return EXIT_PASS if report.passed else EXIT_FAIL


def _list() -> int:
    for name, claim in ExperimentService().list_experiments():
        print(f"{name:<16}{claim}")
    return EXIT_PASS


def _verify(args: argparse.Namespace) -> int:
    result = ExperimentService().verify(args.report)
    for failure in result.failures:
        print(f"  {failure}")
    print(f"{result.report}: {'PASS' if result.passed else 'FAIL'}")
    return EXIT_PASS if result.passed else EXIT_FAIL


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if extra and args.command != "run":
        parser.error(f"unrecognized arguments: {' '.join(extra)}")
    try:
        if getattr(args, "log_level", None):
            setup_logging(args.log_level)
        if args.command == "run":
            return _run(args, extra)
        if args.command == "list":
            return _list()
        return _verify(args)
    except (ConfigError, ValidationError) as e:
        logger.error(f"Configuration error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except HypolabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
