"""Numeric vs closed-form conjugate of the power family, printed as a table."""
import argparse

import numpy as np

from exptail import YoungFunction, legendre_transform


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", type=float, nargs="+", default=[1.5, 2.0, 3.0])
    ap.add_argument("--radius", type=float, default=200.0)
    args = ap.parse_args()
    xs = np.array([0.5, 1.0, 2.0, 5.0, 10.0])
    print(f"{'beta':>5} {'x':>6} {'numeric':>14} {'closed form':>14} {'rel err':>9}")
    for beta in args.betas:
        res = legendre_transform(YoungFunction.power(beta, 1, truncation_radius=args.radius), xs)
        exact = (beta - 1) / beta * xs ** (beta / (beta - 1))
        for x, v, e, t in zip(xs, res.value, exact, res.truncated):
            flag = " truncated" if t else ""
            print(f"{beta:5.2f} {x:6.2f} {v:14.8g} {e:14.8g} {abs(v - e) / e:9.1e}{flag}")


if __name__ == "__main__":
    main()
