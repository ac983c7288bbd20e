"""Period growth next to a separatrix.

Samples tau at distance d (in r) from the boundary of a period annulus, fits
tau = a log(1/d) + c, and reports how small d would have to be for
tau(d) to exceed a given multiple of tau(1e-2).
"""
import argparse
import math

import numpy as np

from solvmax.group import make_group_spec
from solvmax.ode import Tolerances
from solvmax.pendulum import PhasePoint, period, separatrices

THETAS = {
    "det_neg": [[1.0, 0.0], [0.0, -2.0]],
    "focus": [[1.0, -1.0], [1.0, 1.0]],
    "node": [[1.0, 0.0], [0.0, 0.5]],
}


def annulus_boundary(spec):
    """(curve, side): det < 0 approaches the upper arc p1 -> p3 from inside the p2
    annulus, det > 0 approaches the upper homoclinic loop from above."""
    curves = separatrices(spec).curves
    if spec.det_theta < 0:
        return curves["H+13"], -1.0
    return (curves["H2"] if curves["H2"].side > 0 else curves["H4"]), 1.0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--regime", choices=sorted(THETAS), default="det_neg")
    ap.add_argument("--decades", type=int, default=7, help="d runs over 1e-2 .. 1e-(1+decades)")
    ap.add_argument("--factor", type=float, default=3.0)
    args = ap.parse_args()

    spec = make_group_spec(THETAS[args.regime])
    curve, side = annulus_boundary(spec)
    phi = 0.5 * (curve.phi_source + curve.phi_target)
    r0 = float(curve.r_at(phi))
    phi = math.remainder(phi, 2 * math.pi)
    tol = Tolerances(1e-13, 1e-13)

    ds = 10.0 ** -np.arange(2, 2 + args.decades)
    taus = np.array([period(spec, PhasePoint(phi, r0 + side * d), tol).value for d in ds])
    print(f"{'d':>8} {'tau':>12} {'tau/tau0':>9}")
    for d, t in zip(ds, taus):
        print(f"{d:8.0e} {t:12.6f} {t / taus[0]:9.3f}")

    ok = np.isfinite(taus)
    if not ok.all():
        print("(inf: within the classifier's separatrix tolerance)")
    a, c = np.polyfit(np.log(1.0 / ds[ok]), taus[ok], 1)
    print(f"\nfit tau = {a:.4f} log(1/d) + {c:.4f}")
    # a log(1/d) + c > factor * tau(1e-2)
    need = (args.factor * taus[0] - c) / a
    print(f"tau(d) > {args.factor:g} tau(1e-2) needs d < {math.exp(-need):.1e}")


if __name__ == "__main__":
    main()
