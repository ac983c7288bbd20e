"""Maxwell pairs at the first period for a batch of random rotations.

For each sampled lambda the E3 partner is integrated to T = tau(lambda);
prints the endpoint gap and how far apart the two geodesics travel.
"""
import argparse

import numpy as np

from solvmax.group import make_group_spec, make_structure
from solvmax.maxwell import maxwell_certificate
from solvmax.ode import Tolerances
from solvmax.verify import sample_periodic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--theta", type=float, nargs=4, default=[1.0, 0.0, 0.0, -2.0], metavar=("A", "B", "C", "D"))
    ap.add_argument("--eta", type=float, nargs=2, default=[1.0, 1.0])
    ap.add_argument("-n", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = make_group_spec(np.reshape(args.theta, (2, 2)))
    structure = make_structure(spec, args.eta)
    tol = Tolerances(1e-12, 1e-12)
    pts = sample_periodic(spec, np.random.default_rng(args.seed), args.n, min_cos=1e-3, tol=tol)
    print(f"{'phi':>9} {'r':>9} {'tau':>9} {'gap':>9} {'separation':>10}")
    for lam, pr in pts:
        cert = maxwell_certificate(spec, structure, lam, pr.value, n_grid=501, tol=tol)
        print(f"{lam.phi:9.4f} {lam.r:9.4f} {pr.value:9.4f} {cert.endpoint_gap:9.1e} {cert.max_separation:10.4f}")


if __name__ == "__main__":
    main()
