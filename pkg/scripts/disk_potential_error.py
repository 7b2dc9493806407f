"""Far-field error of the lattice potential of a uniform disk under refinement.

The error against (flux / 2 pi) ln(r / a) levels off at a few 1e-4: the
pixelated disk and the anisotropy of the lattice Green function do not vanish
with h at fixed disk radius.

    python3 scripts/disk_potential_error.py
"""

import argparse
import math

import numpy as np

from inplane_dirac.lattice import disk_flux, dual_coords, poisson_solve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=float, default=8.0)
    ap.add_argument("--box", type=float, default=64.0)
    ap.add_argument("--levels", type=int, default=3)
    args = ap.parse_args()
    for lev in range(args.levels):
        h = 1.0 / 2**lev
        L = int(round(args.box / h))
        f = disk_flux(L, 1.0, args.radius, h=h)
        pot = poisson_solve(f)
        xd = dual_coords(L, h)
        X, Y = np.meshgrid(xd, xd, indexing="ij")
        r = np.hypot(X, Y)
        sel = (r > 1.5 * args.radius) & (r < 0.45 * L * h)
        err = np.abs(pot.phi_dual[sel] - f.flux / (2 * math.pi) * np.log(r[sel] / args.radius))
        print(f"h = {h:<6g} L = {L:<4d} max error = {err.max():.3e}")


if __name__ == "__main__":
    main()
