"""Energy-stable SAV finite element solver for 2D inductionless MHD."""

from ._core import (
    Mesh,
    SingularSystemError,
    SolvabilityError,
    SolverError,
    UnsupportedProblemError,
    build_unit_square_mesh,
    cli,
    convergence,
    selftest,
    simulate,
    validate_mesh,
)

__all__ = [
    "Mesh",
    "SingularSystemError",
    "SolvabilityError",
    "SolverError",
    "UnsupportedProblemError",
    "build_unit_square_mesh",
    "cli",
    "convergence",
    "selftest",
    "simulate",
    "validate_mesh",
]
