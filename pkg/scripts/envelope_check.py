"""Discrete convex envelope of the real pure functional against the on-site closed form, by resolution.

    python3 scripts/envelope_check.py -U 1
"""

import argparse
import time

import numpy as np

from dimer_rdmft.analytic import f_c_pure_onsite, f_r_pure_onsite
from dimer_rdmft.model import RealRdm
from dimer_rdmft.search import lower_convex_envelope, sample_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-U", type=float, default=1.0)
    ap.add_argument("--resolutions", type=int, nargs="+", default=[51, 101, 201, 401])
    args = ap.parse_args()
    for n in args.resolutions:
        t0 = time.perf_counter()
        grid = sample_grid(lambda a, b: f_r_pure_onsite(args.U, RealRdm(a, b)), n)
        env = lower_convex_envelope(grid)
        G11, G12 = env.mesh()
        m = env.mask
        err = np.abs(env.values[m] - f_c_pure_onsite(args.U, RealRdm(G11[m], G12[m])))
        print(f"n={n:4d}  max err {err.max():.3e}  mean err {err.mean():.3e}  {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main()
