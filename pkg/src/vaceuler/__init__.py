"""Lagrangian compressible Euler (gamma = 2) with a physical vacuum boundary on a slab."""

from .config import RunConfig, load_config
from .dynamics import (
    InitialData,
    State,
    acceleration,
    acceleration_conservative,
    acceleration_elliptic,
    build_dt_stack,
    simulate,
    step,
    validate_initial_data,
)
from .energy import EnergyBreakdown, bound_monitor, energy, physical_energy
from .errors import VacEulerError
from .grid import Slab
from .kinematics import KinematicBundle, build_bundle

__version__ = "0.1.0"

__all__ = [
    "Slab",
    "KinematicBundle",
    "build_bundle",
    "InitialData",
    "State",
    "RunConfig",
    "load_config",
    "validate_initial_data",
    "acceleration",
    "acceleration_conservative",
    "acceleration_elliptic",
    "build_dt_stack",
    "step",
    "simulate",
    "physical_energy",
    "energy",
    "EnergyBreakdown",
    "bound_monitor",
    "VacEulerError",
]
