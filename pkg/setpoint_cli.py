"""
Script for running setpoint experiments from the command line
Usage: python setpoint_cli.py <command> [--key value ...]
Example: python setpoint_cli.py stability --map map2 --dt 1 --lambda-tilde 4 --q-setpoint 1 \
    --delta-n 0.2 --delta-t 0.25 --delta-n-tilde 0.5 --format json
"""

import os
import sys

script_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, script_dir)

from src.cli import main  # noqa: E402


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
