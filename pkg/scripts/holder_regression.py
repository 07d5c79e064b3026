"""Log-log slopes of rectangular increment variances against side length.

The slope on each axis should approach ``min(2 H, 2)`` for small sides. Prints the
fitted slope for a sweep of Hurst exponents and orders.

    python3 scripts/holder_regression.py
"""

import argparse

import numpy as np

from tempered_hermite.covariance import increment_variance
from tempered_hermite.kernels import FieldParams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, nargs="+", default=[0.6, 0.7, 0.9, 1.2, 1.5])
    ap.add_argument("--k", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--zmin", type=float, default=1e-3)
    ap.add_argument("--zmax", type=float, default=1e-1)
    ap.add_argument("--points", type=int, default=8)
    args = ap.parse_args()
    zs = np.geomspace(args.zmin, args.zmax, args.points)
    print(f"{'k':>2} {'H':>5} {'slope t':>9} {'slope s':>9} {'target':>7}")
    for k in args.k:
        for H in args.h:
            if k > 1 and H > 1:
                continue
            p = FieldParams(k, H, H, args.lam, args.lam)
            v1 = [increment_variance(p, (0.5, 0.5), (z, 0.5)) for z in zs]
            v2 = [increment_variance(p, (0.5, 0.5), (0.5, z)) for z in zs]
            s1 = np.polyfit(np.log(zs), np.log(v1), 1)[0]
            s2 = np.polyfit(np.log(zs), np.log(v2), 1)[0]
            print(f"{k:2d} {H:5.2f} {s1:9.4f} {s2:9.4f} {min(2 * H, 2.0):7.2f}")


if __name__ == "__main__":
    main()
