import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from gpground.core import Params, WaveFunction, gaussian, hermite_ground, make_grid
from gpground.functionals import (
    charge,
    chemical_potential,
    derivative,
    energy,
    kinetic_energy,
    l4_norm4,
    phase_distance,
    x_inner,
    x_norm,
    x_norm_sq,
)
from gpground.groundstate import hamiltonian_apply

GRID = make_grid(12.0, 1024)


def smooth_state(coeffs, grid=GRID):
    """Normalized Hermite-like combination c_j xi^j exp(-xi^2/2)."""
    xi = grid.nodes
    poly = np.polynomial.polynomial.polyval(xi, coeffs)
    return WaveFunction(grid, poly * np.exp(-0.5 * xi**2)).normalized()


def test_charge_examples(grid):
    phi = hermite_ground(grid)
    assert charge(phi) == pytest.approx(1.0, abs=1e-10)
    assert charge(phi.scaled(2.0)) == pytest.approx(4.0, abs=1e-9)
    assert charge(WaveFunction(grid, np.zeros(grid.n_points))) == 0.0


def test_linear_energy_of_ground_mode(grid):
    assert energy(hermite_ground(grid), Params()).total == pytest.approx(1.0, abs=1e-8)


def test_fast_lattice_averages_to_half_depth(grid):
    fine = make_grid(12.0, 8192)
    e = energy(hermite_ground(fine), Params(v0=2.0, alpha=50.0)).lattice
    oracle, _ = integrate.quad(
        lambda x: -2.0 * math.cos(50.0 * x) ** 2 * math.exp(-x * x) / math.sqrt(math.pi),
        -12,
        12,
        limit=2000,
    )
    assert e == pytest.approx(oracle, abs=1e-8)
    assert e == pytest.approx(-1.0, abs=0.05)


@pytest.mark.parametrize("kappa", [0.2, 0.5, 1.3])
@pytest.mark.parametrize("lam", [-3.0, 0.0, 2.5])
def test_gaussian_trial_energy(grid, kappa, lam):
    e = energy(gaussian(grid, kappa), Params(lam)).total
    closed = kappa + 1 / (4 * kappa) + lam * math.sqrt(kappa) / (2 * math.sqrt(math.pi))
    assert e == pytest.approx(closed, abs=1e-10)


def test_l4_of_ground_mode(grid):
    assert l4_norm4(hermite_ground(grid)) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-8)
    assert l4_norm4(WaveFunction(grid, np.zeros(grid.n_points))) == 0.0


@pytest.mark.parametrize("kappa", [0.25, 0.5, 2.0])
def test_l4_of_gaussian_against_quadrature(grid, kappa):
    oracle, _ = integrate.quad(lambda x: (2 * kappa / math.pi) * math.exp(-4 * kappa * x * x), -np.inf, np.inf)
    assert l4_norm4(gaussian(grid, kappa)) == pytest.approx(oracle, rel=1e-10)
    assert oracle == pytest.approx(math.sqrt(kappa / math.pi), rel=1e-10)


def test_chemical_potential_linear(grid):
    phi = hermite_ground(grid)
    assert chemical_potential(phi, Params(), 1.0) == 1.0
    psi = smooth_state([1.0, 0.3, 0.2])
    e = energy(psi, Params()).total
    assert chemical_potential(psi, Params(), e) == e


def test_chemical_potential_matches_rayleigh_quotient(ground_states):
    res = ground_states[2.0]
    psi, p = res.psi, res.params
    rayleigh = np.real(np.vdot(psi.values, hamiltonian_apply(psi.values, psi.grid, p))) * psi.grid.spacing
    assert res.mu == pytest.approx(res.e_min + l4_norm4(psi), abs=1e-12)
    assert res.mu == pytest.approx(rayleigh, abs=1e-10)


def test_x_norm_examples(grid):
    assert x_norm_sq(hermite_ground(grid)) == pytest.approx(1.0, abs=1e-8)
    for kappa in (0.3, 0.5, 1.7):
        assert x_norm_sq(gaussian(grid, kappa)) == pytest.approx(kappa + 1 / (4 * kappa), abs=1e-10)
    xi = grid.nodes
    excited = WaveFunction(grid, math.sqrt(2) * xi * hermite_ground(grid).values)
    assert x_norm_sq(excited) == pytest.approx(3.0, abs=1e-7)


def test_x_inner_is_antilinear_in_first_argument(grid):
    a = smooth_state([1.0, 0.5])
    b = smooth_state([1.0, -0.2, 0.1])
    c = 0.3 + 0.8j
    assert x_inner(a.scaled(c), b) == pytest.approx(np.conj(c) * x_inner(a, b))
    assert x_inner(a, b.scaled(c)) == pytest.approx(c * x_inner(a, b))
    assert x_inner(b, a) == pytest.approx(np.conj(x_inner(a, b)))


def test_x_inner_rejects_grid_mismatch():
    with pytest.raises(ValueError):
        x_inner(hermite_ground(make_grid(12.0, 512)), hermite_ground(GRID))


def test_phase_distance_orbit_members(grid):
    psi = smooth_state([1.0, 0.4, 0.3])
    d = phase_distance(psi.scaled(np.exp(0.7j)), psi)
    assert d.distance == pytest.approx(0.0, abs=1e-10)
    assert d.theta == pytest.approx(0.7, abs=1e-12)
    d = phase_distance(psi, psi)
    assert d.distance == pytest.approx(0.0, abs=1e-12)
    assert d.theta == pytest.approx(0.0, abs=1e-12) or d.theta == pytest.approx(2 * math.pi)


def test_phase_distance_orthogonal_perturbation(grid):
    psi = hermite_ground(grid)
    raw = WaveFunction(grid, (1 + 1j) * grid.nodes**2 * psi.values + 0.3j * psi.values)
    w = WaveFunction(grid, raw.values - x_inner(psi, raw) / x_norm_sq(psi) * psi.values)
    assert abs(x_inner(psi, w)) < 1e-12
    delta = 1e-3
    v = WaveFunction(grid, psi.values + delta * w.values)
    d = phase_distance(v, psi)
    assert d.distance == pytest.approx(delta * x_norm(w), abs=1e-9)
    # oracle: brute-force minimization over a fine theta grid
    thetas = np.linspace(-1e-3, 1e-3, 2001)
    brute = min(x_norm(WaveFunction(grid, v.values - np.exp(1j * t) * psi.values)) for t in thetas)
    assert d.distance <= brute + 1e-12


def test_phase_distance_degenerate_overlap(grid):
    psi = hermite_ground(grid)
    odd = WaveFunction(grid, grid.nodes * psi.values)
    d = phase_distance(odd, psi)
    assert d.degenerate and d.theta == 0.0


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-1, 1), min_size=1, max_size=5).filter(lambda c: abs(c[0]) > 0.1),
    st.floats(0, 2 * math.pi),
    st.floats(0, 5),
    st.floats(0, 3),
    st.floats(0, 4),
)
def test_energy_invariants(coeffs, theta, lam, v0, alpha):
    psi = smooth_state(coeffs)
    p = Params(lam, v0, alpha)
    e = energy(psi, p).total
    assert energy(psi.scaled(np.exp(1j * theta)), p).total == pytest.approx(e, rel=1e-12, abs=1e-12)
    assert e >= 1 - v0 - 1e-9


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=5).filter(lambda c: abs(c[0]) > 0.1), st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_norm_scaling(coeffs, c):
    psi = smooth_state(coeffs)
    assert charge(psi.scaled(c)) == pytest.approx(abs(c) ** 2 * charge(psi), rel=1e-12)
    assert l4_norm4(psi.scaled(c)) == pytest.approx(abs(c) ** 4 * l4_norm4(psi), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-1, 1), min_size=1, max_size=4).filter(lambda c: abs(c[0]) > 0.1),
    st.lists(st.floats(-1, 1), min_size=1, max_size=4).filter(lambda c: abs(c[0]) > 0.1),
    st.floats(0, 2 * math.pi),
)
def test_phase_distance_bounded_by_plain_distance(c1, c2, theta):
    v = smooth_state(c1).scaled(np.exp(1j * theta))
    psi = smooth_state(c2)
    plain = x_norm(WaveFunction(GRID, v.values - psi.values))
    assert phase_distance(v, psi).distance <= plain + 1e-12


def test_spectral_kinetic_matches_fourth_order_differences(grid):
    psi = gaussian(grid, 0.7)
    h = grid.spacing
    u = psi.values.real
    du = (np.roll(u, 2) - 8 * np.roll(u, 1) + 8 * np.roll(u, -1) - np.roll(u, -2)) / (12 * h)
    fd = np.sum(du**2) * h
    assert kinetic_energy(psi) == pytest.approx(fd, rel=1e-6)
    assert np.allclose(derivative(psi).real, -2 * 0.7 * grid.nodes * u, atol=1e-10)
