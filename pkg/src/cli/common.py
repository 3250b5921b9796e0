"""
Command Helpers
Argument parsing and output plumbing shared by the command groups
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from ..core.config_manager import ConfigManager
from ..core.fitting import FreeMask
from ..core.projective import Pose
from ..utils.constants import DEFAULT_INITIAL_POSE
from ..utils.exceptions import InvalidParameterError
from ..utils.helpers import require_finite

INITIAL_KEYS = {
    "height": "height", "tilt": "tilt", "roll": "roll", "heading": "heading",
    "offset_x": "offset_x", "offset_y": "offset_y", "x": "offset_x", "y": "offset_y",
}


class UsageError(Exception):
    """Bad command line usage"""


class CommandParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting with status 2"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def add_config_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, type=Path, help="camera configuration (JSON)")


def add_output_argument(parser: argparse.ArgumentParser, help_text: str = "output file (default: stdout)") -> None:
    parser.add_argument("--output", "-o", type=Path, default=None, help=help_text)


def load_config(args) -> ConfigManager:
    return ConfigManager.load(args.config)


def parse_floats(text: str, name: str = "value") -> List[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidParameterError(f"{name}: expected comma-separated numbers, got '{text}'") from None
    return [require_finite(name, v) for v in values]


def parse_ints(text: str, name: str = "value") -> List[int]:
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part[1:]:
                low, high = part.split("-", 1)
                values.extend(range(int(low), int(high) + 1))
            else:
                values.append(int(part))
        except ValueError:
            raise InvalidParameterError(f"{name}: expected integers or ranges like 2-15, got '{text}'") from None
    return values


def parse_free(text: str) -> FreeMask:
    return FreeMask.from_names(part for part in text.split(",") if part.strip())


def parse_initial(text: Optional[str], config: Optional[ConfigManager] = None) -> Pose:
    """Initial pose: built-in defaults, the config pose ('config'), and key=value overrides"""
    base = Pose(**DEFAULT_INITIAL_POSE)
    if not text:
        return base
    changes = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part == "config":
            if config is None:
                raise InvalidParameterError("--initial config needs a camera config")
            base = config.pose
            continue
        key, sep, value = part.partition("=")
        if not sep or key.strip() not in INITIAL_KEYS:
            raise InvalidParameterError(
                f"--initial: expected 'config' or key=value with key in {sorted(INITIAL_KEYS)}, got '{part}'"
            )
        try:
            changes[INITIAL_KEYS[key.strip()]] = require_finite(key.strip(), float(value))
        except ValueError:
            raise InvalidParameterError(f"--initial: '{value}' is not a number") from None
    return base.with_values(**changes)


def emit(text: str, path: Optional[Path]) -> None:
    """Write text to path, or to stdout"""
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="")


def rows_as_tuples(rows: Sequence, columns: Sequence[str]) -> List[tuple]:
    return [tuple(getattr(row, column) for column in columns) for row in rows]
