"""Bohm trajectories of a falling Gaussian against the closed form.

    python demos/free_fall_trajectories.py --starts 10
"""

import argparse

import numpy as np

from pilotwave.benchmarks import gravity_trajectories


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--starts", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    r = gravity_trajectories(n_starts=args.starts, seed=args.seed)
    print(f"{r.n_starts} starts, {r.aborted} aborted, max relative error {r.max_rel_error:.2e}")
    print(f"{'i':>3} {'x(T) numeric':>14} {'x(T) exact':>14} {'z(T) numeric':>14} {'z(T) exact':>14}")
    for i in range(min(r.n_starts, 10)):
        xn, zn = r.numeric[i, -1]
        xc, zc = r.closed_form[i, -1]
        print(f"{i:3d} {xn:14.8f} {xc:14.8f} {zn:14.8f} {zc:14.8f}")
    # spread of the ensemble grows like sigma_hbar(t)
    print("final spread (numeric):", np.std(r.numeric[:, -1], axis=0))


if __name__ == "__main__":
    main()
