"""Structural certification and relaxation solvers for hyperbolic balance laws."""

__version__ = "0.1.0"

from .core import (
    ModelSystem,
    PartitionedState,
    apply_linear_transform,
    flux_jacobian,
    from_partitioned,
    source_jacobian,
    to_partitioned,
)
from .errors import BalanceLawError
from .maxwellian import MaxwellianResult, maxwellian, maxwellian_batch, solve_equilibrium_v
from .models import CATALOG, FAMILIES, build_model, mutate
from .solver import (
    Grid1D,
    InitialCondition,
    SolverConfig,
    Trajectory,
    compare_trajectories,
    simulate,
)
from .verifier import SampleSpec, Tolerances, VerificationReport, run_full_suite

__all__ = [
    "BalanceLawError", "CATALOG", "FAMILIES", "Grid1D", "InitialCondition", "MaxwellianResult",
    "ModelSystem", "PartitionedState", "SampleSpec", "SolverConfig", "Tolerances", "Trajectory",
    "VerificationReport", "__version__", "apply_linear_transform", "build_model",
    "compare_trajectories", "flux_jacobian", "from_partitioned", "maxwellian",
    "maxwellian_batch", "mutate", "run_full_suite", "simulate", "solve_equilibrium_v",
    "source_jacobian", "to_partitioned",
]
