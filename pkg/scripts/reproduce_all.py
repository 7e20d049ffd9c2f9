#!/usr/bin/env python3
"""Run the full experiment battery and collect artifacts under one directory.

Equivalent to `tramdag reproduce --experiment all`, plus a wall-clock
budget line per experiment.  Use --quick for a reduced smoke run (same
thresholds, so statistical checks may legitimately fail there).
"""

import argparse
import sys
import time

from tramdag.experiments import EXPERIMENT_NAMES, run_all


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="reproduce_out")
    parser.add_argument("--quick", action="store_true")
    parser.add_argument("--only", nargs="*", choices=EXPERIMENT_NAMES, default=None,
                        help="subset of experiments (default: all)")
    args = parser.parse_args()

    started = time.perf_counter()
    names = tuple(args.only) if args.only else None
    results = run_all(args.out_dir, quick=args.quick, names=names)
    for result in results:
        print("\n".join(result.summary_lines()))
        print()

    failed = [r.name for r in results if not r.passed]
    print(f"total wall time {time.perf_counter() - started:.1f}s")
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        return 1
    print(f"all {len(results)} experiments passed; artifacts in {args.out_dir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
