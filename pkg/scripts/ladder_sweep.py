"""Equivalence ladder for several laws across seeds; writes one JSON report per law."""
import argparse
import os

import numpy as np

from exptail import DistributionModel, LadderConfig, YoungFunction, run_ladder
from exptail.io import dumps

MODELS = {
    "gaussian": lambda: DistributionModel.gaussian([[1.0]]),
    "uniform": lambda: DistributionModel.uniform(1),
    "rademacher": lambda: DistributionModel.rademacher(1),
    "exponential": lambda: DistributionModel.centered_exponential(1),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--out", default="ladder_out")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    phi = YoungFunction.quadratic(np.eye(1))
    for name, make in MODELS.items():
        run = run_ladder(make(), phi, args.seeds, LadderConfig(n=args.n))
        culprits = sorted({r.culprit for r in run.reports if r.culprit})
        c = [r.fitted.get("C_tail") for r in run.reports]
        print(f"{name:>12}: {run.verdict:<12} culprit={culprits or '-'} C_tail={np.round(c, 3).tolist()}")
        with open(os.path.join(args.out, f"{name}.json"), "w") as fh:
            fh.write(dumps(run, command="ladder_sweep"))


if __name__ == "__main__":
    main()
