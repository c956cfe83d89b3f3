#!/usr/bin/env python3
"""Run every named reproduction and print a pass/fail summary table."""

import argparse
import json
import time
from pathlib import Path

from qhmm import experiments


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="reports", help="output directory")
    ap.add_argument("--names", default=",".join(sorted(experiments.REPRODUCTIONS)),
                    help="comma-separated experiment names")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for name in args.names.split(","):
        t0 = time.perf_counter()
        report = experiments.reproduce(name)
        elapsed = time.perf_counter() - t0
        rows.append((name, report.passed, report.achieved, report.threshold, elapsed))
        payload = {
            "name": report.name,
            "passed": report.passed,
            "achieved": report.achieved,
            "threshold": report.threshold,
            "details": report.details,
            "seconds": elapsed,
        }
        (out / f"{name}.json").write_text(json.dumps(payload, indent=2) + "\n")

    print(f"{'experiment':<16} {'status':<6} {'achieved':>12} {'threshold':>12} {'time':>8}")
    for name, passed, achieved, threshold, elapsed in rows:
        status = "PASS" if passed else "FAIL"
        print(f"{name:<16} {status:<6} {achieved:>12.3e} {threshold:>12.3e} {elapsed:>7.1f}s")


if __name__ == "__main__":
    main()
