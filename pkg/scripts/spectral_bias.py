"""Deterministic variance bias of the spectral sampler versus lattice size.

The sampler's variance at an anchor is a finite sum over the frequency
lattice, so it can be compared with the exact covariance without drawing
noise. Prints the relative bias for several cutoffs and mode counts.

    python3 scripts/spectral_bias.py --h 0.7 0.9
"""

import argparse

import numpy as np

from tempered_hermite.covariance import CovQuery, covariance
from tempered_hermite.kernels import FieldParams, spectral_constant
from tempered_hermite.simulate import spectral_frequency_grid


def lattice_variance(params: FieldParams, t: float, s: float, cutoff: float, modes: int) -> float:
    fg = spectral_frequency_grid(params.lam, cutoff, modes)
    total = spectral_constant(params) ** 2 * fg.dx * fg.dy
    for anchor, nodes, H, lam in ((t, fg.xs, params.H1, params.lambda1), (s, fg.ys, params.H2, params.lambda2)):
        xi = np.where(np.abs(nodes) < 1e-300, 1e-300, nodes)
        factor = np.abs(np.expm1(1j * anchor * xi) / xi) ** 2 * np.abs(lam + 1j * xi) ** (1.0 - 2.0 * H)
        factor[np.abs(nodes) < 1e-300] = anchor ** 2 * lam ** (1.0 - 2.0 * H)
        total *= float(np.sum(factor))
    return total


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, nargs="+", default=[0.7, 0.9], help="Hurst exponents (both axes)")
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--anchor", type=float, nargs=2, default=[1.0, 1.0])
    ap.add_argument("--cutoffs", type=float, nargs="+", default=[16.0, 64.0, 256.0])
    ap.add_argument("--modes", type=int, nargs="+", default=[129, 257, 513, 1025])
    args = ap.parse_args()
    t, s = args.anchor
    print(f"{'H':>5} {'cutoff':>7} {'modes':>6} {'relative bias':>14}")
    for H in args.h:
        p = FieldParams(1, H, H, args.lam, args.lam)
        exact = covariance(p, CovQuery((t, s), (t, s)))
        for cutoff in args.cutoffs:
            for modes in args.modes:
                v = lattice_variance(p, t, s, cutoff, modes)
                print(f"{H:5.2f} {cutoff:7.0f} {modes:6d} {v / exact - 1:14.5f}")


if __name__ == "__main__":
    main()
