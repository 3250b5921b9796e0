"""
Command Line Application
Builds the argument parser, configures logging and maps errors to exit codes
"""

import logging
import sys
from typing import List, Optional

from .common import CommandParser, UsageError
from .fit_cmd import FitCommands
from .projection_cmd import ProjectionCommands
from .study_cmd import StudyCommands
from .topview_cmd import TopViewCommands
from ..utils.constants import APP_TITLE, EXIT_INVALID_INPUT, LOG_FORMAT
from ..utils.exceptions import CameraGeometryError

logger = logging.getLogger(__name__)


class CamFitApp:
    """Command line controller"""

    def __init__(self):
        self._setup_parser()
        self._setup_commands()

    def _setup_parser(self) -> None:
        self.parser = CommandParser(prog="camfit", description=APP_TITLE)
        self.parser.add_argument("--verbose", "-v", action="count", default=0,
                                 help="more log output (-v info, -vv debug)")
        self.subparsers = self.parser.add_subparsers(dest="command", metavar="command",
                                                     parser_class=CommandParser)
        self.subparsers.required = True

    def _setup_commands(self) -> None:
        self.commands = [
            ProjectionCommands(self.subparsers),
            FitCommands(self.subparsers),
            StudyCommands(self.subparsers),
            TopViewCommands(self.subparsers),
        ]

    @staticmethod
    def _setup_logging(verbosity: int) -> None:
        level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
        logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Parse argv, run the command and return its exit code"""
        try:
            args = self.parser.parse_args(argv)
        except UsageError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INVALID_INPUT
        self._setup_logging(args.verbose)
        try:
            return args.handler(args)
        except CameraGeometryError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INVALID_INPUT
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INVALID_INPUT


def main(argv: Optional[List[str]] = None) -> int:
    return CamFitApp().run(argv)
