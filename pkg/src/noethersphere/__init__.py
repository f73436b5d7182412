"""noethersphere: symbolic-numeric verification of the symmetry
classification of spherically symmetric static spacetimes."""

__version__ = "0.1.0"

from .spacetime import (
    CurvatureReport,
    LambdaBranch,
    Metric,
    MetricError,
    christoffel,
    curvature,
    geodesic_rhs,
    killing_check,
    lagrangian,
    parse_metric_file,
    parse_metric_text,
)
from .noether import (
    CommutatorTable,
    DeterminingSystem,
    FirstIntegral,
    Generator,
    commutator_table,
    determining_system,
    first_integral,
    generator,
    lie_bracket,
    noether_residual,
    parse_generator_file,
    parse_generator_records,
    prolong,
    substitute_into_system,
    total_derivative,
    verify_symmetry,
)
from .numeric import (
    DriftReport,
    FDCurvature,
    GeodesicTrajectory,
    conservation_drift,
    integrate_geodesic,
)
from .catalog import classify_metric, load_catalog, verify_catalog, verify_entry

__all__ = [name for name in dir() if not name.startswith("_")]
