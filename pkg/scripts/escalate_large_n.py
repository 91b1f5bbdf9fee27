"""Opt-in escalation of the study to larger samples or to full scale.

Usage:
  python3 scripts/escalate_large_n.py --n 1000 --reps 200 [--only group1] [--workers K]
  python3 scripts/escalate_large_n.py --full [--workers K]

``--n 1000`` reruns the desk grid with 1000 observations per data set, the
setting in which power within the extreme-value group becomes visible.
``--full`` runs the complete grid (336 scenarios, n=300, N=1000, 1000 data
sets); expect days of CPU time on one core.
"""
import argparse
import sys

from evgof.cli import main as cli


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--full", action="store_true")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--N", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--only")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    args = p.parse_args(argv)
    if args.full:
        cmd = ["power", "--scale", "full", "--out", args.out or "full_out"]
    else:
        cmd = ["power", "--scale", "desk", "--n", str(args.n), "--out", args.out or f"desk_n{args.n}_out"]
    for flag in ("N", "reps", "only"):
        if getattr(args, flag) is not None:
            cmd += [f"--{flag}", str(getattr(args, flag))]
    cmd += ["--seed", str(args.seed), "--workers", str(args.workers)]
    return cli(cmd)


if __name__ == "__main__":
    sys.exit(main())
