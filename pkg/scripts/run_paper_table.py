#!/usr/bin/env python3
"""Reproduce the worked-example acceptance matrix and optionally save the JSON report.

Usage:
    python scripts/run_paper_table.py [--out report.json] [--tol 1e-12]
"""

import argparse
import json
import sys
import time
from pathlib import Path

from steinb import config
from steinb.papertable import build_rows, rows_to_report


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=None)
    parser.add_argument("--tol", type=float, default=None)
    args = parser.parse_args()

    tol = config.resolve_tol(args.tol)
    started = time.perf_counter()
    rows = build_rows(tol)
    elapsed = time.perf_counter() - started

    width = max(len(r.row_id) for r in rows)
    for r in rows:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.row_id:{width}s}  {r.computed}")
    n_pass = sum(r.passed for r in rows)
    print(f"\n{n_pass}/{len(rows)} rows pass in {elapsed:.1f}s at tol {tol:g}")

    if args.out:
        args.out.write_text(json.dumps(rows_to_report(rows, tol), indent=2, sort_keys=True) + "\n")
        print(f"report written to {args.out}")
    return 0 if n_pass == len(rows) else 1


if __name__ == "__main__":
    sys.exit(main())
