"""Terminal output for edgecode: log setup and sweep progress on stderr."""

import logging
import sys
import time
from typing import Optional

IS_TTY = sys.stderr.isatty()

LOG_FORMAT = "[%(asctime)s] [%(levelname)s] %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"


class Colors:
    PURPLE = '\033[95m'
    CYAN = '\033[96m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    RED = '\033[91m'
    BOLD = '\033[1m'
    DIM = '\033[2m'
    RESET = '\033[0m'


def _c(color: str, text: str) -> str:
    return f"{color}{text}{Colors.RESET}" if IS_TTY else text


def setup_logging(debug: bool = False):
    """One stderr handler for the whole 'lib' package."""
    root = logging.getLogger("lib")
    root.handlers.clear()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATEFMT))
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if debug else logging.INFO)
    root.propagate = False


class ProgressDisplay:
    """Cell-by-cell sweep progress."""

    def __init__(self, total: int, label: str = "sweep"):
        self.total = total
        self.done = 0
        self.skipped = 0
        self.label = label
        self.start_time = time.time()

    def start(self, jobs: int):
        sys.stderr.write(
            f"{_c(Colors.PURPLE + Colors.BOLD, 'edgecode')} {self.label}: "
            f"{self.total} cell(s), {jobs} job(s)\n")
        sys.stderr.flush()

    def cell_done(self, name: str, skipped: bool = False):
        self.done += 1
        if skipped:
            self.skipped += 1
        mark = _c(Colors.DIM, "=") if skipped else _c(Colors.GREEN, "✓")
        note = " (verified, skipped)" if skipped else ""
        if IS_TTY:
            sys.stderr.write(f"\r{' ' * 78}\r")
        sys.stderr.write(f"{mark} [{self.done}/{self.total}] {name}{note}\n")
        sys.stderr.flush()

    def show_complete(self, summary: Optional[str] = None):
        elapsed = time.time() - self.start_time
        sys.stderr.write(
            f"{_c(Colors.GREEN + Colors.BOLD, '✓ done')} ({elapsed:.1f}s) - "
            f"{self.done - self.skipped} run, {self.skipped} resumed\n")
        if summary:
            sys.stderr.write(summary)
        sys.stderr.flush()
