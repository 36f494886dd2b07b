"""Chemical potential versus self-interaction: numerical ground states against the
variational and perturbative models on lambda in [-8, 8].

Writes <out>.csv (sweep schema), <out>.gp (gnuplot script) and prints the error metrics.
"""
import argparse
import json
from pathlib import Path

from gpground.analysis import figure1_dataset, plot_script
from gpground.core import make_grid
from gpground.groundstate import SolverConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=33)
    ap.add_argument("--grid-n", type=int, default=1024)
    ap.add_argument("--grid-l", type=float, default=12.0)
    ap.add_argument("--dtau", type=float, default=1e-3)
    ap.add_argument("--out", default="figure1")
    args = ap.parse_args()

    sw, metrics = figure1_dataset(make_grid(args.grid_l, args.grid_n), SolverConfig(dtau=args.dtau), args.steps)
    csv_path = Path(args.out).with_suffix(".csv")
    sw.to_csv(csv_path)
    csv_path.with_suffix(".gp").write_text(plot_script(csv_path.name))

    print(f"{'lambda':>7} {'mu':>12} {'quad-mu':>10} {'pert-mu':>10}")
    for lam, mu, q, p in zip(sw.lambdas, sw.mu, sw.mu_app_quad, sw.mu_perturb):
        print(f"{lam:7.2f} {mu:12.8f} {q - mu:10.5f} {p - mu:10.5f}")
    print(json.dumps(metrics.as_dict(), indent=2))


if __name__ == "__main__":
    main()
