"""Check the worst-case bounds over several seeds and summarize the tightest margin.

    python3 scripts/rate_check.py --seeds 0 1 2 --horizons 10 100 1000
"""

import argparse

from acgd.rates import PASS, RATE_FAMILIES, verify_rates

ADAPTIVE = ("adaptive-constant", "adaptive-adjustable", "pure-backtracking")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--horizons", type=int, nargs="+", default=[10, 100, 1000])
    args = ap.parse_args(argv)

    violations = 0
    for family in RATE_FAMILIES:
        for tag in ADAPTIVE:
            worst = None
            for seed in args.seeds:
                report = verify_rates(family, tag, args.horizons, seed)
                violations += len(report.violations)
                for c in report.checks:
                    if c.status == PASS and c.bound > 0:
                        ratio = c.observed / c.bound
                        if worst is None or ratio > worst[0]:
                            worst = (ratio, c.label, c.N, seed)
            if worst:
                print(f"{family:<11} {tag:<20} max observed/bound = {worst[0]:.3e} "
                      f"({worst[1]}, N={worst[2]}, seed={worst[3]})")
    print(f"violations: {violations}")
    return 1 if violations else 0


if __name__ == "__main__":
    raise SystemExit(main())
