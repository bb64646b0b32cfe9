"""B(phi), GLS and Orlicz norms for a few standard laws under the quadratic phi."""
import argparse

import numpy as np

from exptail import DistributionModel, MGFOracle, YoungFunction, norm_report, sample

MODELS = {
    "gaussian": lambda d: DistributionModel.gaussian(np.eye(d)),
    "rademacher": DistributionModel.rademacher,
    "uniform": DistributionModel.uniform,
    "exponential": DistributionModel.centered_exponential,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    phi = YoungFunction.quadratic(np.eye(args.d))
    print(f"{'model':>12} {'bphi(emp)':>10} {'bphi(exact)':>11} {'gls':>8} {'orlicz':>8}")
    for name, make in MODELS.items():
        model = make(args.d)
        s = sample(model, args.n, args.seed)
        rep = norm_report(s, phi)
        exact = norm_report(s, phi, oracle=MGFOracle.analytic(model)).bphi_norm
        print(f"{name:>12} {rep.bphi_norm:10.4f} {exact:11.4f} {rep.gls_norm:8.4f} {rep.orlicz_norm:8.4f}")


if __name__ == "__main__":
    main()
