"""Numerical laboratory for slicing inequalities on intersection bodies
with arbitrary measures."""

from .bodies import (
    Ball,
    CrossPolytope,
    Cube,
    Ellipsoid,
    HPolytope,
    IntersectionBody,
    LpBall,
    RotatedBody,
    ScaledBody,
    StarBody,
    TabulatedBody,
    body_from_spec,
    body_volume,
    intersection_body_of,
    random_hpolytope,
)
from .errors import CapabilityError, ConvergenceError, DataError, DomainError, SliceKitError
from .john import inscribed_ellipsoid, sandwich
from .lab import (
    GridConfig,
    InequalityReport,
    StabilityReport,
    mc_oracle,
    run_suite,
    unit_ib_source,
    verify_eq1,
    verify_eq2,
    verify_eq3,
    verify_stability,
    verify_thm1,
)
from .measures import (
    BodyMeasure,
    Bump,
    CompositeDensity,
    Gaussian,
    SquaredNorm,
    Uniform,
    Zero,
    body_measure,
    density_from_spec,
    max_section,
    section_measure,
    section_volume,
)
from .radon import ib_pairing_residual, radon, radon_transform, selfdual_residual
from .scalars import dimension_constants, slicing_constant, sphere_area
from .sphere import sphere_grid, subsphere_grid

__version__ = "0.1.0"
