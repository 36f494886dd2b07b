"""Orbital stability scan: sup over tau of the distance to the ground-state orbit
after perturbations of size delta, for several couplings and two grid resolutions."""
import argparse

from gpground.core import Params, make_grid
from gpground.dynamics import PropagatorConfig, stability_probe
from gpground.groundstate import SolverConfig, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambdas", type=float, nargs="+", default=[1.0, -1.0, -2.0])
    ap.add_argument("--deltas", type=float, nargs="+", default=[0.0, 1e-3, 1e-2, 1e-1])
    ap.add_argument("--grids", type=int, nargs="+", default=[512, 1024])
    ap.add_argument("--dt", type=float, default=5e-4)
    ap.add_argument("--t-final", type=float, default=20.0)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    cfg = PropagatorConfig(dt=args.dt, t_final=args.t_final)
    print(f"{'lambda':>7} {'n':>5} {'delta':>8} {'initial':>11} {'sup':>11} {'ratio':>7}")
    for lam in args.lambdas:
        for n in args.grids:
            grid = make_grid(12.0, n)
            gs = solve(grid, Params(lam), SolverConfig())
            for row in stability_probe(gs.psi, gs.params, args.deltas, cfg, args.seed):
                print(f"{lam:7.2f} {n:5d} {row.delta:8.0e} {row.initial_distance:11.3e} "
                      f"{row.sup_distance:11.3e} {row.ratio:7.3f}")


if __name__ == "__main__":
    main()
