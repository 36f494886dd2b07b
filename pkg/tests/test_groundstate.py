import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eig_banded

from gpground.core import Params, gaussian, hermite_ground, make_grid
from gpground.functionals import charge, phase_distance, x_norm
from gpground.groundstate import (
    NonConvergence,
    SolverConfig,
    complex_phase_check,
    residual,
    solve,
)
from gpground.variational import mu_perturbative, mu_quadratic

# central-difference weights of the second derivative, eighth order
FD8 = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72])


def fd_lowest_eigenvalue(grid, p):
    """Lowest eigenvalue of -d2/dxi2 + V on the grid by a banded eighth-order stencil."""
    h = grid.spacing
    n = grid.n_points
    band = np.zeros((5, n))
    band[0] = -FD8[4] / h**2 + p.linear_potential(grid.nodes)
    for off in range(1, 5):
        band[off, : n - off] = -FD8[4 - off] / h**2
    w = eig_banded(band, lower=True, eigvals_only=True, select="i", select_range=(0, 0))
    return float(w[0])


def test_linear_anchor(grid):
    res = solve(grid, Params(), SolverConfig())
    assert res.e_min == pytest.approx(1.0, abs=1e-6)
    assert res.mu == pytest.approx(1.0, abs=1e-6)
    diff = res.psi.values - hermite_ground(grid).values
    assert x_norm(type(res.psi)(grid, diff)) <= 1e-4


def test_lattice_linear_problem_matches_banded_eigensolver(grid):
    p = Params(0.0, 1.0, 2.0)
    res = solve(grid, p, SolverConfig(dtau=1e-2))
    assert res.e_min == pytest.approx(fd_lowest_eigenvalue(grid, p), abs=1e-5)


def test_repulsive_mu_inside_quadratic_envelope(ground_states):
    mu = ground_states[1.0].mu
    lo = float(min(mu_quadratic(1.0), mu_perturbative(1.0)))
    hi = float(max(mu_quadratic(1.0), mu_perturbative(1.0)))
    assert lo - 0.01 <= mu <= hi + 0.01


def test_residual_examples(grid):
    phi = hermite_ground(grid)
    assert residual(phi, Params(), 1.0) == pytest.approx(0.0, abs=1e-8)
    assert residual(phi, Params(), 2.0) == pytest.approx(1.0, abs=1e-8)


def test_converged_residual_below_tolerance(ground_states):
    for res in ground_states.values():
        assert res.residual <= 1e-8
        assert res.monotonicity_violations == 0
        assert charge(res.psi) == pytest.approx(1.0, abs=1e-12)


def test_energy_trace_is_monotone(grid):
    res = solve(grid, Params(3.0), SolverConfig(dtau=1e-2, record_energy=True))
    assert np.all(np.diff(res.energy_trace) <= 1e-13)


@pytest.mark.parametrize("lam", [0.0, 1.0, 2.0])
def test_positive_symmetric_decreasing(ground_states, grid, lam):
    v = ground_states[lam].psi.values
    assert np.max(np.abs(v.imag)) == 0.0
    u = v.real
    assert np.min(u) > 0
    m = grid.mirror_index()
    assert np.max(np.abs(u - u[m])) <= 1e-6 * np.max(u)
    assert np.all(np.diff(u[grid.nodes >= 0]) <= 1e-8)


@pytest.mark.parametrize("lam", [-2.0, 0.0, 2.0])
def test_gaussian_decay_bound(ground_states, grid, lam):
    u = np.abs(ground_states[lam].psi.values)
    xi = np.abs(grid.nodes)
    rate = 0.5 * (1 - 0.1)
    at4 = np.isclose(xi, 4.0, atol=grid.spacing / 2)
    c = np.max(u[at4] / np.exp(-rate * xi[at4] ** 2))
    band = (xi >= 4) & (xi <= 8)
    assert np.all(u[band] <= c * np.exp(-rate * xi[band] ** 2) * (1 + 1e-9))


@pytest.mark.parametrize("lam", [0.0, 1.0, 4.0])
def test_seed_independence(grid, lam):
    a = solve(grid, Params(lam), SolverConfig(dtau=1e-2))
    b = solve(grid, Params(lam), SolverConfig(dtau=1e-2, seed_kind="gaussian_kappa", seed_kappa=1.5))
    assert x_norm(type(a.psi)(grid, a.psi.values - b.psi.values)) <= 1e-5


def test_complex_phase_checks(grid):
    cfg = SolverConfig(dtau=1e-2)
    assert complex_phase_check(grid, Params(1.0), cfg, 1.2) <= 1e-6
    assert complex_phase_check(grid, Params(1.0), cfg, np.sin(grid.nodes)) <= 1e-4
    assert complex_phase_check(grid, Params(0.0), cfg, 0.0) <= 1e-8


def test_sign_convention(grid):
    neg = -hermite_ground(grid).values.real
    res = solve(grid, Params(1.0), SolverConfig(dtau=1e-2, seed_kind="custom", custom_seed=neg))
    centre = int(np.argmin(np.abs(grid.nodes)))
    assert res.psi.values[centre].real > 0


def test_unstable_step_rejected(grid):
    with pytest.raises(ValueError):
        solve(grid, Params(), SolverConfig(dtau=0.1))


def test_step_budget_exhaustion(grid):
    with pytest.raises(NonConvergence):
        solve(grid, Params(2.0), SolverConfig(dtau=1e-3, max_steps=200))


def test_under_resolved_state_is_flagged():
    coarse = make_grid(12.0, 32)
    res = solve(coarse, Params(), SolverConfig(dtau=1e-2))
    assert res.warnings and "finer grid" in res.warnings[0]


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dtau=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(seed_kind="random")
    with pytest.raises(ValueError):
        SolverConfig(seed_kind="custom")


def test_json_schema(ground_states):
    d = ground_states[1.0].to_json_dict()
    assert d["schema_version"] == "1"
    assert set(d) == {"schema_version", "lambda", "v0", "alpha", "e_min", "mu", "residual", "iterations", "grid"}
    assert d["grid"] == {"n": 1024, "l": 12.0}


@settings(max_examples=8, deadline=None)
@given(st.floats(-3.0, 6.0))
def test_ground_state_beats_trial_gaussians(lam):
    g = make_grid(12.0, 256)
    res = solve(g, Params(lam), SolverConfig(dtau=1e-2))
    from gpground.functionals import energy

    for kappa in (0.3, 0.5, 0.8):
        assert res.e_min <= energy(gaussian(g, kappa), Params(lam)).total + 1e-12
