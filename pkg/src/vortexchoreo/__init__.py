"""Point-vortex dynamics near boundaries and choreographic periodic orbits."""

from .asymptotics import AsymptoticsReport, analyze_family
from .dynamics import (
    IntegrateOptions,
    Trajectory,
    VortexConfiguration,
    grad_hamiltonian,
    hamiltonian,
    integrate,
    vector_field,
)
from .errors import VortexError
from .geometry import BoundaryFrame, DomainMap, boundary_frame, chi_r, chi_r_inverse, project_to_boundary
from .greens import GreenEvaluator, check_assumption
from .limit_orbit import LimitOrbit, limit_orbit_eval, seed_orbit
from .orbit_finder import (
    ChoreographyProblem,
    ContinuationFamily,
    LoopSetting,
    PeriodicOrbit,
    continue_family,
    reduced_residual,
    shoot,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticsReport",
    "BoundaryFrame",
    "ChoreographyProblem",
    "ContinuationFamily",
    "DomainMap",
    "GreenEvaluator",
    "IntegrateOptions",
    "LimitOrbit",
    "LoopSetting",
    "PeriodicOrbit",
    "Trajectory",
    "VortexConfiguration",
    "VortexError",
    "analyze_family",
    "boundary_frame",
    "check_assumption",
    "chi_r",
    "chi_r_inverse",
    "continue_family",
    "grad_hamiltonian",
    "hamiltonian",
    "integrate",
    "limit_orbit_eval",
    "project_to_boundary",
    "reduced_residual",
    "seed_orbit",
    "shoot",
    "vector_field",
]
