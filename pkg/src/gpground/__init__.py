"""Ground states and variational formulae for the 1D Gross-Pitaevskii equation
with a harmonic trap and an optical lattice."""

from .core import (
    DimensionalParams,
    Grid,
    Params,
    WaveFunction,
    gaussian,
    hermite_ground,
    make_grid,
    to_dimensionless,
)
from .functionals import (
    EnergyBreakdown,
    charge,
    chemical_potential,
    energy,
    l4_norm4,
    phase_distance,
    x_norm_sq,
)
from .groundstate import GroundStateResult, SolverConfig, solve

__version__ = "0.1.0"
