#!/usr/bin/env python3
"""
edgecode - Simulate an edge station serving cached video segments with
index-coded multicast.

Usage:
    python3 edgecode.py gen-profile --config config/edgecode.json [--seed S]
    python3 edgecode.py run --config <cfg> --profile <path> --policy lfu-index [--coding]
    python3 edgecode.py sweep --config <cfg> [--jobs J]
    python3 edgecode.py report --input out/aggregated.csv --out out/report

Environment:
    EDGECODE_OUT        Output directory (overrides output.dir)
    EDGECODE_DEBUG      Verbose logging
    EDGECODE_JOBS       Default sweep parallelism
"""

import sys
from pathlib import Path

# Add lib to path
SCRIPT_DIR = Path(__file__).parent.resolve()
sys.path.insert(0, str(SCRIPT_DIR))

from lib import cli

if __name__ == "__main__":
    sys.exit(cli.main())
