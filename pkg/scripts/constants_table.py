"""Tabulate the fractional Hardy constants, the remainder constants c_p and the ball-decomposition constants.

    python3 scripts/constants_table.py > constants.csv
"""

import argparse
import sys

from coulomb_gn.constants import constants_csv, constants_rows
from coulomb_gn.errors import DomainError


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--s", type=float, nargs="+", default=[0.1, 0.25, 0.4, 0.5, 0.75, 0.9, 1.0])
    ap.add_argument("--p", type=float, nargs="+", default=[2.0, 3.0, 4.0])
    args = ap.parse_args()

    hardy = []
    for d in args.dims:
        for s in args.s:
            for p in args.p:
                if s * p < d:
                    hardy.append((d, s, p))
    fdl = [(d, g) for d in args.dims for g in (0.25 * d, 0.5 * d, 0.75 * d)]
    rows = []
    for key in hardy:
        try:
            rows += constants_rows([key])
        except DomainError as exc:
            print(f"skip {key}: {exc}", file=sys.stderr)
    rows += constants_rows((), [p for p in args.p], fdl)
    sys.stdout.write(constants_csv(rows))


if __name__ == "__main__":
    main()
