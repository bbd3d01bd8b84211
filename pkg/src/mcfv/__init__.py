"""Entropy-stable finite-volume solver for the multicomponent Euler equations."""

from .thermo import (ConservedState, EntropyQuantities, GasMixture, InadmissibleStateError,
                     PrimitiveState, SpeciesParams)
from .mesh import Field, Grid
from .solver import SolverConfig, rhs, run, stable_dt, step

__all__ = ["ConservedState", "EntropyQuantities", "Field", "GasMixture", "Grid",
           "InadmissibleStateError", "PrimitiveState", "SolverConfig", "SpeciesParams",
           "rhs", "run", "stable_dt", "step"]
__version__ = "0.1.0"
