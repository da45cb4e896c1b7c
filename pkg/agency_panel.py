import sys
import logging
import argparse
from typing import List, Optional

from adapters.report_adapter import FORMATS
from panel.panel_actions import (
    CLUSTER_COLUMNS, action_correlate, action_describe, action_fit, action_mediate, action_robust, action_run,
    action_synth,
)
from panel.panel_common import LOGGER_NAME, Settings, configure_logging, load_settings, parse_star_levels
from panel.panel_errors import PanelError, UsageError
from panel.panel_types import ActionTable

logger = logging.getLogger(LOGGER_NAME)

actions: ActionTable = {
    "describe": action_describe,
    "correlate": action_correlate,
    "fit": action_fit,
    "mediate": action_mediate,
    "robust": action_robust,
    "synth": action_synth,
    "run": action_run,
}


class PanelArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(message)


def _star_levels(text: str):
    try:
        return parse_star_levels(text)
    except ValueError as error:
        raise argparse.ArgumentTypeError(str(error)) from None


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser(settings: Settings) -> PanelArgumentParser:
    common = PanelArgumentParser(add_help=False)
    common.add_argument("--winsor-lower", type=float, default=settings.winsor_lower)
    common.add_argument("--winsor-upper", type=float, default=settings.winsor_upper)
    common.add_argument("--no-winsor", action="store_true", help="skip the annual winsorization")
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--stars", type=_star_levels, default=settings.stars,
                        help="three increasing p-value cut-offs for ***, ** and *")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--cluster", choices=sorted(CLUSTER_COLUMNS), default=None,
                        help="cluster standard errors instead of the classical ones")
    common.add_argument("--filter-log", action="store_true", help="print per-reason filter counts to stderr")
    common.add_argument("--workers", type=_positive_int, default=settings.workers)
    common.add_argument("--debug", action="store_true")

    parser = PanelArgumentParser(prog="agency_panel", description="Executive shareholding, agency costs and R&D")
    commands = parser.add_subparsers(dest="command", required=True)

    describe = commands.add_parser("describe", parents=[common], help="descriptive statistics")
    describe.add_argument("--input", required=True)
    describe.add_argument("--vars", nargs="+")
    describe.add_argument("--labels", action="store_true", help="add each variable's definition")

    correlate = commands.add_parser("correlate", parents=[common], help="Pearson correlation matrix")
    correlate.add_argument("--input", required=True)
    correlate.add_argument("--vars", nargs="+")

    fit = commands.add_parser("fit", parents=[common], help="one fixed-effects regression")
    fit.add_argument("--input", required=True)
    fit.add_argument("--model", required=True, help='e.g. "INV ~ HOLD + SIZE | year + industry"')
    fit.add_argument("--within", action="store_true", help="fit on the residualized (within) design")

    mediate = commands.add_parser("mediate", parents=[common], help="five-model mediation battery")
    mediate.add_argument("--input", required=True)

    robust = commands.add_parser("robust", parents=[common], help="next-year INV rerun")
    robust.add_argument("--input", required=True)

    synth = commands.add_parser("synth", parents=[common], help="write a synthetic panel CSV")
    synth.add_argument("--config")
    synth.add_argument("--out", required=True)

    run = commands.add_parser("run", parents=[common], help="full pipeline, every report under --out")
    run.add_argument("--input", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--labels", action="store_true")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    try:
        args = build_parser(load_settings()).parse_args(argv)
        if args.debug:
            configure_logging(debug=True)
        output = actions[args.command](args)
    except PanelError as error:
        logger.debug("Aborting", exc_info=True)
        print(f"error: {type(error).__name__}: {error}", file=sys.stderr)
        return error.exit_code
    sys.stdout.write(output)
    return 0


if __name__ == '__main__':
    sys.exit(main())
