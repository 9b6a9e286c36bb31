"""Run every strategy on every desk-scale benchmark and tabulate the outcomes.

    python3 scripts/problem_sweep.py --out sweep.csv [--trace-dir traces/]
"""

import argparse
import csv
import os

from acgd.cli import RunSpec, best_marks, compare, fmt
from acgd.problems import PROBLEM_NAMES
from acgd.stepsize import STRATEGY_NAMES


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--problems", nargs="+", default=list(PROBLEM_NAMES), choices=PROBLEM_NAMES)
    ap.add_argument("--max-iter", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="sweep.csv")
    ap.add_argument("--trace-dir", help="write per-run traces under <dir>/<problem>/<strategy>.csv")
    args = ap.parse_args(argv)

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("problem", "strategy", "status", "iterations", "objective_final", "gap_final", "grad_evals",
                    "fn_evals", "best_in"))
        for name in args.problems:
            spec = RunSpec(problem=name, seed=args.seed, max_iter=args.max_iter)
            trace_dir = os.path.join(args.trace_dir, name) if args.trace_dir else None
            rows = compare(spec, STRATEGY_NAMES, trace_dir)
            for r, best in zip(rows, best_marks(rows)):
                w.writerow([name, r.strategy, r.status] +
                           ["" if v is None else fmt(v) for v in
                            (r.iterations, r.objective_final, r.gap_final, r.grad_evals, r.fn_evals)] + [best])
            fh.flush()


if __name__ == "__main__":
    main()
