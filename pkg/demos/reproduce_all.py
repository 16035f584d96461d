"""Runs every reproduction suite with the default seed and prints the summaries.

Run: python3 demos/reproduce_all.py [--seed N]
"""

import argparse

from subdirect.reproduce import DEFAULT_SEED, SUITES, run_suite


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    seed = ap.parse_args().seed
    failed = 0
    for name in SUITES:
        res = run_suite(name, seed)
        print(res.summary())
        failed += not res.ok
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
