"""snakerod: intrinsic Cosserat snake-robot dynamics on SE(3) fields."""

__version__ = "0.1.0"

from .rod import Grid, RodProperties, cylinder_properties, uniform_properties  # noqa: F401
from .elasticity import StiffnessLaw, StrainField, strain  # noqa: F401
from .dynamics import (  # noqa: F401
    NonFiniteStateError,
    SimState,
    SolverConfig,
    cfl_dt,
    reconstruct_poses,
    spatial_momentum,
    step,
    total_energy,
)
from .actuation import ControlLaw, CpgParams, ZeroControl, cpg_law  # noqa: F401
from .scenario import ConfigError, load_scenario  # noqa: F401
