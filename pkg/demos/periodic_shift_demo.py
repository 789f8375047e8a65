#!/usr/bin/env python3
"""
Periodic setting: a random rotation hides the shared shape from the base test.

Two samples of n = 20 curves are drawn from the same distribution, except that
the Y curves are rotated by an extra random phase of size delta.  The base
Gaussian kernel sees the rotation as a difference, the averaged kernel and the
align-then-test baseline do not.
"""
import numpy as np

from invmmd.procedures import derive_seed, run_methods
from invmmd.simulation import gen_periodic_values, periodic_grid


def main(n=20, reps=40, deltas=(0.0, 0.5, 1.0)):
    grid = periodic_grid(128)
    print(f"{'delta':>6} {'base':>6} {'invariant':>10} {'aligned':>8}")
    for j, delta in enumerate(deltas):
        hits = {"base": 0, "invariant": 0, "aligned": 0}
        for r in range(reps):
            seed = derive_seed(7, j, r)
            rng = np.random.default_rng([seed, 0])
            X = gen_periodic_values("H0", delta, n, rng, "X")
            Y = gen_periodic_values("H0", delta, n, rng, "Y")
            out = run_methods(X, Y, grid, "periodic", S=16, B=100, seed=seed)
            for m, rep in out.reports.items():
                hits[m] += rep.reject
        print(f"{delta:6.1f} {hits['base'] / reps:6.2f} {hits['invariant'] / reps:10.2f} "
              f"{hits['aligned'] / reps:8.2f}")
    # base climbs with delta, the other two stay near alpha = 0.05


if __name__ == "__main__":
    main()
