"""tau along a vertical line phi = const, written as CSV (r, region, tau).

Crossing the separatrices shows the logarithmic blow-up; in the det < 0
regime the line phi = -pi/2 starts at the center p2.
"""
import argparse
import csv
import math
import sys

import numpy as np

from solvmax.group import make_group_spec
from solvmax.pendulum import PhasePoint, classify_region, period


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--theta", type=float, nargs=4, default=[1.0, 0.0, 0.0, -2.0], metavar=("A", "B", "C", "D"))
    ap.add_argument("--phi", type=float, default=-math.pi / 2)
    ap.add_argument("--r-max", type=float, default=4.0)
    ap.add_argument("-n", type=int, default=81)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    spec = make_group_spec(np.reshape(args.theta, (2, 2)))
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["r", "region", "tau"])
    for r in np.linspace(-args.r_max, args.r_max, args.n):
        lam = PhasePoint(args.phi, r)
        tau = period(spec, lam).value
        w.writerow([f"{r:.17g}", classify_region(spec, lam).value, "inf" if math.isinf(tau) else f"{tau:.17g}"])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
