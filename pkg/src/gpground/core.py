"""Spatial grid, wavefunction container and parameter types.

All lengths and energies are in trap units: the dimensionless equation reads

    -psi'' + xi^2 psi + lam |psi|^2 psi - v0 cos^2(alpha xi) psi = mu psi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MIN_POINTS = 16


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L, L) with the right endpoint excluded."""

    half_width: float
    n_points: int
    spacing: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    wavenumbers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise ValueError(f"half_width must be positive and finite, got {self.half_width}")
        if int(self.n_points) != self.n_points or self.n_points < MIN_POINTS:
            raise ValueError(f"n_points must be an integer >= {MIN_POINTS}, got {self.n_points}")
        n = int(self.n_points)
        h = 2.0 * self.half_width / n
        nodes = -self.half_width + h * np.arange(n)
        k = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
        nodes.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "n_points", n)
        object.__setattr__(self, "spacing", h)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "wavenumbers", k)

    @property
    def k_max(self) -> float:
        return math.pi / self.spacing

    def mirror_index(self) -> np.ndarray:
        """Index j' with nodes[j'] == -nodes[j]; node 0 (= -L) maps onto itself."""
        n = self.n_points
        return (-np.arange(n)) % n


def make_grid(half_width: float = 12.0, n_points: int = 1024) -> Grid:
    return Grid(float(half_width), n_points)


@dataclass(frozen=True)
class Params:
    """Dimensionless self-interaction ``lam``, lattice depth ``v0`` and wavenumber ``alpha``."""

    lam: float = 0.0
    v0: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        for name in ("lam", "v0", "alpha"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.v0 < 0:
            raise ValueError(f"v0 must be >= 0, got {self.v0}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")

    def with_lambda(self, lam: float) -> "Params":
        return Params(float(lam), self.v0, self.alpha)

    def lattice(self, xi: np.ndarray) -> np.ndarray:
        """The (negative) lattice potential -v0 cos^2(alpha xi)."""
        if self.v0 == 0.0:
            return np.zeros_like(xi)
        return -self.v0 * np.cos(self.alpha * xi) ** 2

    def linear_potential(self, xi: np.ndarray) -> np.ndarray:
        return xi**2 + self.lattice(xi)


@dataclass(frozen=True)
class DimensionalParams:
    """Physical parameters of the trapped condensate in SI (or any consistent) units."""

    hbar_omega: float
    mass: float
    omega: float
    laser_intensity: float = 0.0
    laser_wavelength: float = 1.0
    self_interaction: float = 0.0
    chemical_potential: float | None = None

    def __post_init__(self):
        for name in ("hbar_omega", "mass", "omega", "laser_wavelength"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value}")
        length = self.length
        if not (math.isfinite(length) and length > 0):
            raise ValueError(f"oscillator length is not positive and finite: {length}")

    @property
    def hbar(self) -> float:
        return self.hbar_omega / self.omega

    @property
    def length(self) -> float:
        """Oscillator length sqrt(hbar / (m omega))."""
        return math.sqrt(self.hbar / (self.mass * self.omega))


def to_dimensionless(dp: DimensionalParams) -> Params:
    l = dp.length
    lam = 2.0 * dp.self_interaction / (l * dp.hbar_omega)
    v0 = 2.0 * dp.laser_intensity / dp.hbar_omega
    alpha = 2.0 * math.pi * l / dp.laser_wavelength
    for name, value in (("lam", lam), ("v0", v0), ("alpha", alpha)):
        if not math.isfinite(value):
            raise ValueError(f"derived {name} is not finite")
    return Params(lam, v0, alpha)


def dimensionless_chemical_potential(dp: DimensionalParams) -> float:
    if dp.chemical_potential is None:
        raise ValueError("no chemical potential set")
    return 2.0 * dp.chemical_potential / dp.hbar_omega


def dimensional_chemical_potential(mu: float, dp: DimensionalParams) -> float:
    return 0.5 * mu * dp.hbar_omega


@dataclass(frozen=True)
class WaveFunction:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("wavefunction samples must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def xi(self) -> np.ndarray:
        return self.grid.nodes

    def is_real(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.values.imag) <= atol))

    def scaled(self, c: complex) -> "WaveFunction":
        return WaveFunction(self.grid, c * self.values)

    def normalized(self) -> "WaveFunction":
        q = float(np.sum(np.abs(self.values) ** 2) * self.grid.spacing)
        if q == 0.0:
            raise ValueError("cannot normalize the zero function")
        return self.scaled(1.0 / math.sqrt(q))


def gaussian(grid: Grid, kappa: float) -> WaveFunction:
    """Unit-charge Gaussian (2 kappa / pi)^(1/4) exp(-kappa xi^2)."""
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    xi = grid.nodes
    return WaveFunction(grid, (2.0 * kappa / math.pi) ** 0.25 * np.exp(-kappa * xi**2))


def hermite_ground(grid: Grid) -> WaveFunction:
    """Harmonic oscillator ground state pi^(-1/4) exp(-xi^2 / 2)."""
    return gaussian(grid, 0.5)
