"""Fidelity after m cycles for the four dipole sequences at wT = pi/4, dlambda/w = 0.01."""

import argparse

import numpy as np

from pxpdrive.experiments import simulate
from pxpdrive.protocols import DriveParams

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--L", type=int, default=10)
ap.add_argument("--cycles", type=int, default=2000)
args = ap.parse_args()

for kind in ("dp-periodic", "dp-random", "dp-fib", "dp-tm"):
    p = DriveParams(w=1.0, lam=1.0, delta_lambda=0.01, T=np.pi / 4, seed=0)
    F = simulate(kind, args.L, p, args.cycles).F
    print(f"{kind:12s} F({args.cycles}) = {F[-1]:.5f}   min F = {F.min():.5f}")
