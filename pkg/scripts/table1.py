"""Yb-171 tweezer parameters at 375, 532 and 1064 nm, written through the command line interface."""
import sys
from pathlib import Path

from iontweezer.cli import main

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "table1.json"

if __name__ == "__main__":
    sys.exit(main(["tweezer-params", "--config", str(CONFIG), "--format", "csv", *sys.argv[1:]]))
