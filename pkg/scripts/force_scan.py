"""Fitted boundary exponent and prefactor of dF/dR against the closed form, over angle.

    python3 scripts/force_scan.py -U 1 -V -0.5 -X 0.25 --angles 64
"""

import argparse

import numpy as np

from dimer_rdmft.analytic import force_prefactor, vanishing_angles
from dimer_rdmft.model import InteractionParams
from dimer_rdmft.varrep import force_fit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-U", type=float, default=1.0)
    ap.add_argument("-V", type=float, default=0.0)
    ap.add_argument("-X", type=float, default=0.0)
    ap.add_argument("--angles", type=int, default=32)
    args = ap.parse_args()
    w = InteractionParams(args.U, args.V, args.X)
    print(f"{'phi':>8} {'exponent':>10} {'fit C':>12} {'closed C':>12} {'rel err':>9}")
    for phi in np.linspace(0, 2 * np.pi, args.angles, endpoint=False):
        fit = force_fit(w, phi)
        c = float(force_prefactor(w, phi))
        rel = abs(fit.prefactor / c - 1) if c > 1e-9 else float("nan")
        print(f"{phi:8.4f} {fit.exponent:10.5f} {fit.prefactor:12.6e} {c:12.6e} {rel:9.2e}")
    print("vanishing angles:", vanishing_angles(w))


if __name__ == "__main__":
    main()
