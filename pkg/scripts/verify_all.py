"""Run every verification suite at its default configuration and print one line per check.

    python3 scripts/verify_all.py [--suite fractional] [--json report.json]
"""

import argparse
import json
import time
from dataclasses import asdict

from tempered_hermite.harness import SUITES, run_suites


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--suite", action="append", choices=list(SUITES))
    ap.add_argument("--json")
    args = ap.parse_args()
    t0 = time.perf_counter()
    results = run_suites(args.suite)
    for r in results:
        print(f"{r.status:5s} {r.name:45s} {r.statistic:12.4g} (tol {r.tolerance:.3g}) {r.seconds:7.1f} s")
    print(f"total {time.perf_counter() - t0:.0f} s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([asdict(r) for r in results], fh, indent=2)
    return 0 if all(r.status != "fail" for r in results) else 1


if __name__ == "__main__":
    raise SystemExit(main())
