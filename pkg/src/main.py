"""Main entry point for qrw-cocycles."""

import argparse
import logging
import sys

# Configure logging FIRST, before any other imports that might create loggers
from .config import config

log_level = getattr(logging, config.log_level, logging.INFO)

logging.basicConfig(
    level=log_level,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    force=True,
)
logging.getLogger().setLevel(log_level)

logger = logging.getLogger(__name__)

from .errors import ConfigError, QWCError  # noqa: E402
from .harness.report import read_csv, recompute_orders  # noqa: E402
from .harness.runner import run_scenario  # noqa: E402
from .harness.scenario import ScenarioConfig  # noqa: E402
from .harness.selftest import run_selftest  # noqa: E402

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def cmd_run(args: argparse.Namespace) -> int:
    """Run a scenario and write its CSV report to --out or stdout."""
    cfg = ScenarioConfig.load(args.config)
    report = run_scenario(cfg, threads=args.threads)
    if args.out:
        report.write_csv(args.out)
    else:
        sys.stdout.write(report.to_csv())
    if args.summary:
        for line in report.summary_lines():
            print(line)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_selftest(args: argparse.Namespace) -> int:
    """Run the built-in property checks and print one line per check."""
    results = run_selftest()
    for result in results:
        print(result.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"Self-test failed: {', '.join(failed)}")
        return EXIT_FAIL
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def cmd_order(args: argparse.Namespace) -> int:
    """Recompute per-pair order estimates from a stored CSV report."""
    rows = read_csv(args.csv)
    window = args.window or config.order_window
    for index, order in recompute_orders(rows, window).items():
        print(f"pair {index}: order {order:.6f}")
    return EXIT_OK if all(row.passed for row in rows) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    """Build the qwc parser with its run, selftest and order subcommands."""
    parser = argparse.ArgumentParser(
        prog="qwc",
        description="Quantum random walks and the convergence of their limit cocycles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a convergence scenario")
    run.add_argument("config", help="Path to a scenario JSON file")
    run.add_argument("--out", help="Write the CSV report here instead of stdout")
    run.add_argument("--summary", action="store_true", help="Print per-pair orders and pass flags")
    run.add_argument("--threads", type=int, default=None, help="Worker threads (default: QWC_THREADS)")
    run.set_defaults(handler=cmd_run)

    selftest = sub.add_parser("selftest", help="Run the built-in property checks")
    selftest.set_defaults(handler=cmd_selftest)

    order = sub.add_parser("order", help="Recompute order estimates from a CSV report")
    order.add_argument("csv", help="Path to a report written by run")
    order.add_argument("--window", type=int, default=None, help="Number of trailing h values in the fit")
    order.set_defaults(handler=cmd_order)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Dispatch to a subcommand and map errors to exit codes."""
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except QWCError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
