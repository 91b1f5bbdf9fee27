"""Export the population functionals A^P and A^CFG of a copula on a grid.

Usage: python3 scripts/export_curves.py --family clayton --theta 2 [--grid 101] [--out FILE]

For an extreme-value family the Pickands function is written alongside; for
FGM the closed forms are added as a check column.
"""
import argparse
import sys

import numpy as np

from evgof.cli import write_rows
from evgof.families import CopulaModel
from evgof.ltd import fgm_closed_form, functional_value


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--family", required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--out")
    args = p.parse_args(argv)
    model = CopulaModel(args.family, args.theta)
    t = np.linspace(0.0, 1.0, args.grid)
    cols = [t, functional_value(model, "P", t), functional_value(model, "CFG", t)]
    header = ["t", "A_P", "A_CFG"]
    if model.is_extreme_value:
        cols.append(model.pickands(t))
        header.append("A")
    elif model.name == "fgm":
        cols += [fgm_closed_form(args.theta, "P", t), fgm_closed_form(args.theta, "CFG", t)]
        header += ["A_P_closed", "A_CFG_closed"]
    write_rows(args.out, header, zip(*cols))
    return 0


if __name__ == "__main__":
    sys.exit(main())
