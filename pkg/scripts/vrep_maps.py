"""Real-pure v-representability maps and their distance to the closed-form ellipses.

    python3 scripts/vrep_maps.py --resolution 401 --out runs/vrep_maps
"""

import argparse
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from dimer_rdmft import export
from dimer_rdmft.analytic import FunctionalKind, ellipse_onsite, ellipses_general, inside_mask
from dimer_rdmft.model import InteractionParams
from dimer_rdmft.varrep import vrep_map

SETTINGS = [(1.0, 0.0), (1.0, 0.5), (0.5, 1.0), (1.0, -0.5)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolution", type=int, default=401)
    ap.add_argument("--out", type=Path, default=Path("runs/vrep_maps"))
    args = ap.parse_args()
    for U, V in SETTINGS:
        w = InteractionParams(U, V)
        ellipses = ellipse_onsite(U) if V == 0 else ellipses_general(w)
        vmap = vrep_map((FunctionalKind.FR_pure, FunctionalKind.FR_ens), w, args.resolution)
        G11, G12 = vmap.status.mesh()
        mask = vmap.status.mask
        wrong = (vmap.not_representable() != inside_mask(G11, G12, ellipses)) & mask
        cells = 0.0
        if wrong.any():
            curve = cKDTree(np.vstack([e.sample(20000) for e in ellipses]))
            d, _ = curve.query(np.column_stack([G11[wrong], G12[wrong]]))
            cells = d.max() / vmap.status.spacing
        tag = f"U{U:g}_V{V:g}"
        export.write_verdicts(args.out / f"verdicts_{tag}.csv", vmap)
        export.write_ellipses(args.out / f"ellipses_{tag}.csv", ellipses)
        print(f"U={U:+.2f} V={V:+.2f}: regions={vmap.region_count()} mismatched={int(wrong.sum())} "
              f"worst mismatch {cells:.2f} cells  {vmap.counts()}")


if __name__ == "__main__":
    main()
