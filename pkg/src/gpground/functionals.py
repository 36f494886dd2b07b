"""Energy, charge, norms and the X inner product, evaluated on a periodic grid.

Quadrature is the periodic rectangle rule; derivatives are Fourier spectral.
Kinetic terms are computed through Parseval so that they agree exactly with the
kinetic operator used by the solvers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import Params, WaveFunction


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    trap: float
    interaction: float
    lattice: float

    @property
    def total(self) -> float:
        return self.kinetic + self.trap + self.interaction + self.lattice

    def as_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "trap": self.trap,
            "interaction": self.interaction,
            "lattice": self.lattice,
            "total": self.total,
        }


class OrbitDistance(NamedTuple):
    theta: float
    distance: float
    degenerate: bool = False


def _values(psi) -> np.ndarray:
    return psi.values if isinstance(psi, WaveFunction) else np.asarray(psi)


def derivative(psi: WaveFunction) -> np.ndarray:
    grid = psi.grid
    k = grid.wavenumbers.copy()
    if grid.n_points % 2 == 0:
        k[grid.n_points // 2] = 0.0  # odd derivative: drop the Nyquist mode
    return np.fft.ifft(1j * k * np.fft.fft(psi.values))


def apply_kinetic(values: np.ndarray, k2: np.ndarray) -> np.ndarray:
    """-d^2/dxi^2 applied spectrally; ``k2`` is the squared wavenumber array."""
    return np.fft.ifft(k2 * np.fft.fft(values))


def kinetic_energy(psi: WaveFunction) -> float:
    grid = psi.grid
    spec = np.fft.fft(psi.values)
    return float(np.sum(grid.wavenumbers**2 * np.abs(spec) ** 2) * grid.spacing / grid.n_points)


def charge(psi: WaveFunction) -> float:
    return float(np.sum(np.abs(psi.values) ** 2) * psi.grid.spacing)


def l4_norm4(psi: WaveFunction) -> float:
    return float(np.sum(np.abs(psi.values) ** 4) * psi.grid.spacing)


def energy(psi: WaveFunction, p: Params) -> EnergyBreakdown:
    grid = psi.grid
    dens = np.abs(psi.values) ** 2
    h = grid.spacing
    xi = grid.nodes
    trap = float(np.sum(xi**2 * dens) * h)
    interaction = 0.5 * p.lam * float(np.sum(dens**2) * h)
    lattice = float(np.sum(p.lattice(xi) * dens) * h)
    return EnergyBreakdown(kinetic_energy(psi), trap, interaction, lattice)


def chemical_potential(psi: WaveFunction, p: Params, e_total: float) -> float:
    """Lagrange multiplier of a ground state: E + (lam/2) ||psi||_4^4."""
    return e_total + 0.5 * p.lam * l4_norm4(psi)


def x_inner(phi: WaveFunction, psi: WaveFunction) -> complex:
    """<phi, psi>_X = int conj(phi') psi' + xi^2 conj(phi) psi (antilinear in phi)."""
    grid = psi.grid
    if phi.grid.n_points != grid.n_points or phi.grid.half_width != grid.half_width:
        raise ValueError("wavefunctions live on different grids")
    a = np.fft.fft(phi.values)
    b = np.fft.fft(psi.values)
    kin = np.sum(grid.wavenumbers**2 * np.conj(a) * b) / grid.n_points
    pot = np.sum(grid.nodes**2 * np.conj(phi.values) * psi.values)
    return complex((kin + pot) * grid.spacing)


def x_norm_sq(psi: WaveFunction) -> float:
    return x_inner(psi, psi).real


def x_norm(psi: WaveFunction) -> float:
    return math.sqrt(max(x_norm_sq(psi), 0.0))


def phase_distance(v: WaveFunction, psi: WaveFunction) -> OrbitDistance:
    """Distance in X from ``v`` to the phase orbit {exp(i theta) psi}.

    The optimal rotation is theta* = arg <psi, v>_X. When that overlap vanishes
    every rotation is equally good; theta* = 0 is returned with ``degenerate`` set.
    """
    overlap = x_inner(psi, v)
    scale = math.sqrt(max(x_norm_sq(psi) * x_norm_sq(v), 0.0))
    degenerate = abs(overlap) <= 1e-14 * max(scale, 1e-300)
    theta = 0.0 if degenerate else math.atan2(overlap.imag, overlap.real)
    diff = WaveFunction(v.grid, v.values - np.exp(1j * theta) * psi.values)
    return OrbitDistance(theta % (2.0 * math.pi), x_norm(diff), degenerate)
