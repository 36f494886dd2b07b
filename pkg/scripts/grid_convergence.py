"""Ground-state energy and chemical potential under grid refinement and box enlargement."""
import argparse

from gpground.core import Params, make_grid
from gpground.groundstate import SolverConfig, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambdas", type=float, nargs="+", default=[-8.0, -2.0, 0.0, 2.0, 8.0])
    args = ap.parse_args()
    grids = [(8.0, 256), (10.0, 512), (12.0, 1024), (16.0, 2048)]
    for lam in args.lambdas:
        ref = solve(make_grid(*grids[-1]), Params(lam), SolverConfig(dtau=5e-3))
        for l, n in grids[:-1]:
            r = solve(make_grid(l, n), Params(lam), SolverConfig(dtau=5e-3))
            print(f"lambda={lam:6.2f} L={l:5.1f} n={n:5d}  dE={r.e_min - ref.e_min:+.2e}  dmu={r.mu - ref.mu:+.2e}")


if __name__ == "__main__":
    main()
