"""Projected boundaries of the quadratic Gaussian region for several distortion targets.

Writes one CSV per slice with a column per distortion target, and prints
whether every tighter target stays inside the looser one.

    python scripts/gaussian_slices.py --distortions 0.5,0.8 --out-dir runs/gauss
"""

import argparse
import csv
import math
from pathlib import Path

import numpy as np

from ceo_secrecy.gaussian import SLICES, GaussianParams, boundary_sweep, slice_dominated, slice_envelope
from ceo_secrecy.errors import InfeasibleDistortion


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--var-x", type=float, default=1.0)
    ap.add_argument("--var-n1", type=float, default=1.0)
    ap.add_argument("--var-n2", type=float, default=1.0)
    ap.add_argument("--var-ne", type=float, default=math.inf)
    ap.add_argument("--distortions", default="0.3,0.5,0.8")
    ap.add_argument("--grid", type=int, default=60)
    ap.add_argument("--points", type=int, default=81, help="abscissae per slice")
    ap.add_argument("--out-dir", type=Path, default=Path("runs/gaussian"))
    args = ap.parse_args()

    params = GaussianParams(args.var_x, args.var_n1, args.var_n2, args.var_ne)
    targets = sorted(float(d) for d in args.distortions.split(","))
    sweeps = {}
    for D in targets:
        try:
            sweeps[D] = boundary_sweep(params, D, args.grid)
        except InfeasibleDistortion as e:
            print(f"D={D}: skipped ({e})")
    if not sweeps:
        return
    args.out_dir.mkdir(parents=True, exist_ok=True)
    xs = np.linspace(0.0, 3.0, args.points)
    for name in SLICES:
        env = {D: slice_envelope(rows, name, xs) for D, rows in sweeps.items()}
        path = args.out_dir / f"slice_{name.replace(',', '_')}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([name.split(",")[0]] + [f"D={D:g}" for D in env])
            for i, x in enumerate(xs):
                w.writerow([f"{x:.6g}"] + [f"{env[D][i]:.10g}" for D in env])
        ds = list(env)
        nested = all(slice_dominated(env[a], env[b], name) for a, b in zip(ds, ds[1:]))
        print(f"{name:14s} nested in D: {nested}  -> {path}")


if __name__ == "__main__":
    main()
