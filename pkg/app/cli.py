"""Command-line front end: one subcommand per handler module."""

import argparse
import logging
from typing import List, Optional

from app.exceptions import PowerLogitError
from app.handlers import anneal, bench, diagnose, experiments, fit, predict

HANDLERS = (fit, anneal, predict, diagnose, bench, experiments)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powerlogit",
        description="Regularized logistic regression by power-posterior Gibbs sampling and annealing",
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in HANDLERS:
        module.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parses ``argv`` and runs the chosen command.

    Returns:
        int: Process exit status. 0 on success, otherwise the ``exit_code``
        of the raised :class:`~app.exceptions.PowerLogitError`.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        return args.handler(args)
    except PowerLogitError as e:
        logging.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
