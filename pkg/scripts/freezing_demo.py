"""Magnetization of the U3 drive at lam/w = 10, wT = 2 pi for three pulse jitters.

Prints M at a few cycle counts and the m = 950..1050 average for each lam dT.
"""

import argparse
import warnings

import numpy as np

from pxpdrive.experiments import avg_magnetization, simulate
from pxpdrive.protocols import DriveParams

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--L", type=int, default=10)
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()

lam = 10.0
for label, x in (("pi/8", np.pi / 8), ("pi/2", np.pi / 2), ("pi", np.pi)):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = DriveParams(w=1.0, lam=lam, T=2 * np.pi, dT=x / lam, seed=args.seed)
    tr = simulate("u3", args.L, p, 1050)
    snap = ", ".join(f"M({m})={tr.M[m]:+.3f}" for m in (10, 100, 1000))
    print(f"lam dT = {label:5s} {snap}  Mbar={avg_magnetization(tr):+.4f}")
