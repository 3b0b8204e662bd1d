"""Console helpers for the command-line front end.

`fatal` and `bold` are the CLI's only way of talking to a terminal besides
plain `print`; library modules log through `logging.getLogger(__name__)`
and leave handler setup to `setup_logging`, called once by cli.main.

Reads: (nothing internal)
"""

import logging
import sys


def fatal(msg, code=1):
    """Print error message and exit with `code`."""
    print(f"Error: {msg}", file=sys.stderr)
    sys.exit(code)


def bold(msg):
    """Return bold text (ANSI escape codes)."""
    return f"\033[1m{msg}\033[0m"


def setup_logging(verbose=False):
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
