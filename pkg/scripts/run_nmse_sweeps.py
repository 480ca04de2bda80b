#!/usr/bin/env python3
"""Run the pilot-only and with-data NMSE sweeps and write result tables."""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cdce.config import load_config
from cdce.harness import emit, run_sweep


def main() -> int:
    repo = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--configs",
        nargs="+",
        default=[
            os.path.join(repo, "configs", "pilot_only.yaml"),
            os.path.join(repo, "configs", "with_data.yaml"),
        ],
        help="config files to sweep",
    )
    parser.add_argument("--out-dir", default="results", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    args = parser.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    for path in args.configs:
        cfg = load_config(path)
        rows = run_sweep(cfg)
        stem = os.path.splitext(os.path.basename(path))[0]
        out = os.path.join(args.out_dir, f"{stem}.{args.format}")
        emit(rows, out, fmt=args.format)
        print(f"{path}: wrote {len(rows)} rows to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
