"""Run the desk-scale level/power study and print the rejection table.

Usage: python3 scripts/run_desk_suite.py [--out DIR] [--only group1,...] [--workers K]

Results are written per scenario, so an interrupted run resumes where it
stopped when started again with the same --out.
"""
import argparse
import csv
import sys
from pathlib import Path

from evgof.cli import main as cli


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="desk_out")
    p.add_argument("--only")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args(argv)
    cmd = ["power", "--scale", "desk", "--seed", str(args.seed), "--workers", str(args.workers), "--out", args.out]
    if args.only:
        cmd += ["--only", args.only]
    code = cli(cmd)
    if code:
        return code
    with open(Path(args.out) / "power.csv") as fh:
        rows = list(csv.DictReader(fh))
    print(f"\n{'true model':<14} {'tau':>5} {'H0':<9} {'stat':<6} {'reject %':>8} {'se %':>6}")
    for r in rows:
        print(f"{r['true_model']:<14} {float(r['tau']):>5.2f} {r['h0']:<9} {r['statistic']:<6} "
              f"{100 * float(r['rejection_rate']):>8.1f} {100 * float(r['mc_stderr']):>6.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
