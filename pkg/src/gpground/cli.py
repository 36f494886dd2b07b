"""Command-line entry point: ``python3 -m gpground <command> [flags]``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import CSV_COLUMNS, SweepError, figure1_metrics, plot_script, run_checks, sweep
from .core import Grid, Params
from .dynamics import PropagatorConfig, ResolutionLoss, perturbed_state, propagate
from .functionals import phase_distance
from .groundstate import BlowupDetected, NonConvergence, SolverConfig, solve
from .variational import (
    MU_QUADRATIC_EPS,
    NoRootFound,
    QuadratureError,
    VariationalCurve,
    mu_perturbative,
    mu_quadratic,
    sigma,
    solve_kappa,
)

COMMANDS = ("groundstate", "sweep", "variational", "evolve", "figure1", "check")
SCHEMA_VERSION = "1"


class UsageError(Exception):
    pass


def _finite(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return x


def _positive(text: str) -> float:
    x = _finite(text)
    if x <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def _nonneg(text: str) -> float:
    x = _finite(text)
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {text!r}")
    return x


def _count(minimum: int):
    def parse(text: str) -> int:
        try:
            n = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if n < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}: {text!r}")
        return n

    return parse


# flag name -> (dest, type, default)
FLAGS = {
    "lambda": ("lam", _finite, 0.0),
    "v0": ("v0", _nonneg, 0.0),
    "alpha": ("alpha", _nonneg, 0.0),
    "grid-n": ("grid_n", _count(16), 1024),
    "grid-l": ("grid_l", _positive, 12.0),
    "dtau": ("dtau", _positive, 1e-2),
    "tol": ("tol", _positive, 1e-8),
    "lambda-min": ("lambda_min", _finite, -8.0),
    "lambda-max": ("lambda_max", _finite, 8.0),
    "steps": ("steps", _count(2), 33),
    "dt": ("dt", _positive, 1e-4),
    "t-final": ("t_final", _positive, 20.0),
    "delta": ("delta", _nonneg, 0.0),
    "seed": ("seed", _count(0), 42),
    "out": ("out", str, None),
    "format": ("format", str, None),
}


@dataclass
class RunConfig:
    command: str
    params: Params
    grid: Grid
    solver: SolverConfig
    propagator: PropagatorConfig
    lambda_min: float = -8.0
    lambda_max: float = 8.0
    steps: int = 33
    delta: float = 0.0
    seed: int = 42
    output_path: Path | None = None
    format: str = "json"
    extra: dict = field(default_factory=dict)


def read_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment; keys are flag names."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in FLAGS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpground", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", metavar="FILE")
    for name, (dest, typ, _) in FLAGS.items():
        parser.add_argument(f"--{name}", dest=dest, type=typ, default=None)
    return parser


def parse_args(argv) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    values = {dest: default for dest, _, default in FLAGS.values()}
    if ns.config:
        for key, text in read_config_file(ns.config).items():
            dest, typ, _ = FLAGS[key]
            try:
                values[dest] = typ(text)
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"config key {key}: {exc}") from exc
    for dest, _, _ in FLAGS.values():
        if getattr(ns, dest) is not None:
            values[dest] = getattr(ns, dest)

    default_format = "csv" if ns.command in ("sweep", "evolve", "figure1") else "json"
    fmt = values["format"] or default_format
    if fmt not in ("csv", "json"):
        raise UsageError(f"format: must be csv or json, got {fmt!r}")
    if values["lambda_min"] >= values["lambda_max"]:
        raise UsageError("lambda-min: must be below lambda-max")
    try:
        grid = Grid(values["grid_l"], values["grid_n"])
        params = Params(values["lam"], values["v0"], values["alpha"])
        solver = SolverConfig(dtau=values["dtau"], residual_tol=values["tol"])
        solver.check_stability(grid, params)
        prop = PropagatorConfig(dt=values["dt"], t_final=values["t_final"])
    except ValueError as exc:
        raise UsageError(f"dtau: {exc}" if "dtau" in str(exc) else str(exc)) from exc

    out = values["out"]
    if out is None and ns.command == "figure1":
        out = "figure1.csv"
    return RunConfig(
        command=ns.command,
        params=params,
        grid=grid,
        solver=solver,
        propagator=prop,
        lambda_min=values["lambda_min"],
        lambda_max=values["lambda_max"],
        steps=values["steps"],
        delta=values["delta"],
        seed=values["seed"],
        output_path=Path(out) if out else None,
        format=fmt,
    )


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{x:.17g}" if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output_path is None:
        sys.stdout.write(text)
    else:
        cfg.output_path.write_text(text)


def _variational_report(cfg: RunConfig) -> dict:
    p = cfg.params
    curve = VariationalCurve(Params(0.0, p.v0, p.alpha))
    lam = p.lam
    report = {
        "schema_version": SCHEMA_VERSION,
        "lambda": lam,
        "v0": p.v0,
        "alpha": p.alpha,
        "kappa": solve_kappa(lam, p),
        "trial_energy": curve.trial_energy_at_optimum(lam),
    }
    if p.v0 == 0.0:
        report.update(
            sigma=sigma(lam),
            e_app=curve.e_app(lam),
            mu_app=curve.mu_app(lam),
            mu_quadratic=float(mu_quadratic(lam, MU_QUADRATIC_EPS)),
            mu_perturbative=float(mu_perturbative(lam)),
        )
    return report


def _sweep_text(sw, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for j in range(len(sw)):
            w.writerow([f"{float(sw.column(c)[j]):.17g}" for c in CSV_COLUMNS])
        return buf.getvalue()
    return _dump_json(
        {
            "schema_version": SCHEMA_VERSION,
            "columns": list(CSV_COLUMNS),
            "rows": [[float(sw.column(c)[j]) for c in CSV_COLUMNS] for j in range(len(sw))],
        }
    )


def run(cfg: RunConfig) -> int:
    cmd = cfg.command
    if cmd == "groundstate":
        res = solve(cfg.grid, cfg.params, cfg.solver)
        d = res.to_json_dict()
        if cfg.format == "json":
            _emit(cfg, _dump_json(d))
        else:
            keys = ["lambda", "v0", "alpha", "e_min", "mu", "residual", "iterations"]
            _emit(cfg, _rows_csv(keys, [[d[k] for k in keys]]))
        return 0
    if cmd == "variational":
        _emit(cfg, _dump_json(_variational_report(cfg)))
        return 0
    if cmd == "sweep":
        sw = sweep(cfg.lambda_min, cfg.lambda_max, cfg.steps, cfg.params, cfg.grid, cfg.solver)
        _emit(cfg, _sweep_text(sw, cfg.format))
        return 0
    if cmd == "figure1":
        sw = sweep(-8.0, 8.0, cfg.steps, Params(0.0, cfg.params.v0, cfg.params.alpha), cfg.grid, cfg.solver)
        out = cfg.output_path
        out.write_text(_sweep_text(sw, "csv"))
        out.with_suffix(".gp").write_text(plot_script(out.name))
        metrics = figure1_metrics(sw).as_dict()
        out.with_suffix(".json").write_text(_dump_json({"schema_version": SCHEMA_VERSION, **metrics}))
        return 0
    if cmd == "check":
        sw = sweep(cfg.lambda_min, cfg.lambda_max, cfg.steps, cfg.params, cfg.grid, cfg.solver)
        reports = run_checks(sw)
        payload = [{"schema_version": SCHEMA_VERSION, **r.to_json_dict()} for r in reports]
        _emit(cfg, _dump_json(payload))
        return 0 if all(r.passed for r in reports) else 1
    if cmd == "evolve":
        gs = solve(cfg.grid, cfg.params, cfg.solver)
        u0 = perturbed_state(gs.psi, cfg.delta, cfg.seed)
        traj = propagate(u0, cfg.params, cfg.propagator, reference=gs.psi)
        if cfg.format == "csv":
            _emit(cfg, _rows_csv(["tau", "charge", "energy", "phase_distance"], traj.rows()))
        else:
            _emit(
                cfg,
                _dump_json(
                    {
                        "schema_version": SCHEMA_VERSION,
                        "lambda": cfg.params.lam,
                        "delta": cfg.delta,
                        "seed": cfg.seed,
                        "initial_distance": phase_distance(u0, gs.psi).distance,
                        "sup_phase_distance": traj.sup_phase_distance,
                        "charge_drift": traj.charge_drift,
                        "energy_drift": traj.energy_drift,
                    }
                ),
            )
        return 0
    raise UsageError(f"unknown command {cmd!r}")


COMPUTATION_ERRORS = (
    NonConvergence,
    BlowupDetected,
    ResolutionLoss,
    SweepError,
    NoRootFound,
    QuadratureError,
    ArithmeticError,
)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else 2
    except UsageError as exc:
        print(f"gpground: error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except COMPUTATION_ERRORS as exc:
        print(f"gpground: computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"gpground: I/O error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"gpground: computation failed: {exc}", file=sys.stderr)
        return 1
