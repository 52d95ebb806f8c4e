"""Numerical laboratory for the overdetermined problem div(a(|grad u|) grad u) = 0
with a point singularity: radial oracles, moving planes and a cut-cell solver."""

__version__ = "0.1.0"

from serrin_lab.exceptions import (
    ConvergenceError,
    DomainError,
    FluxExtractionError,
    FluxInversionError,
    GeometryError,
    QuadratureError,
    SerrinLabError,
    ValidationError,
)
from serrin_lab.nonlinearity import (
    BoundedGradient,
    CustomNonlinearity,
    EllipticityReport,
    Nonlinearity,
    PLaplacian,
    RegularizedNonlinearity,
    nonlinearity_from_config,
    verify_ellipticity,
)
from serrin_lab.radial import RadialSolution, SingularValue, make_radial
from serrin_lab.geometry import (
    Circle,
    CriticalReflection,
    Direction,
    Ellipse,
    PlanarDomain,
    Polygon,
    critical_time,
    domain_from_config,
    reflect_point,
    serrin_inequality,
    symmetry_planes,
)
from serrin_lab.solver import (
    DiscreteField,
    ExcisedProblem,
    boundary_flux,
    comparison_check,
    constancy_defect,
    harnack_quotient,
    make_problem,
    solve,
)
from serrin_lab.verify import ExperimentReport, run_contrapositive, run_forward, run_symmetry_sweep

__all__ = [
    "__version__",
    "Circle",
    "CriticalReflection",
    "Direction",
    "DiscreteField",
    "Ellipse",
    "ExcisedProblem",
    "ExperimentReport",
    "FluxExtractionError",
    "PlanarDomain",
    "Polygon",
    "boundary_flux",
    "comparison_check",
    "constancy_defect",
    "critical_time",
    "domain_from_config",
    "harnack_quotient",
    "make_problem",
    "reflect_point",
    "run_contrapositive",
    "run_forward",
    "run_symmetry_sweep",
    "serrin_inequality",
    "solve",
    "symmetry_planes",
    "BoundedGradient",
    "ConvergenceError",
    "CustomNonlinearity",
    "DomainError",
    "EllipticityReport",
    "FluxInversionError",
    "GeometryError",
    "Nonlinearity",
    "PLaplacian",
    "QuadratureError",
    "RadialSolution",
    "RegularizedNonlinearity",
    "SerrinLabError",
    "SingularValue",
    "ValidationError",
    "make_radial",
    "nonlinearity_from_config",
    "verify_ellipticity",
]
