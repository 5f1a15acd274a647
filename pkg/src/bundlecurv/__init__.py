"""Sectional curvature engine for homogeneous-bundle metrics on matrix groups."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DegenerateMetricError,
    DimensionError,
    GenericityError,
    IllConditionedError,
    NoWitnessError,
    NotApplicableError,
    ValidationError,
)
from .liealg import (
    AlgebraElement,
    GroupElement,
    LieAlgebra,
    Subspace,
    adjoint,
    bracket,
    centralizer,
    generic_perturb,
    group_exp,
    inner,
    is_generic,
    joint_centralizer,
    maximal_torus_through,
    so,
)
from .bundle import (
    BundleTriple,
    catalog_triple,
    fatness_deficit,
    make_block_triple,
)
from .metric import (
    MetricSpec,
    diagonal_metric,
    identity_metric,
    interpolated_collapse_metric,
    random_spd_metric,
)
from .curvature import (
    CurvatureSample,
    fiber_curvature,
    group_curvature,
    sectional,
)
from .search import (
    ScanResult,
    SweepRow,
    ZeroPlaneCertificate,
    certify_zero_plane,
    curvature_scan,
    find_commuting_pair,
    maximize_orbit_form,
    variation_sweep,
    zero_curvature_schedule,
)
from .config import RunConfig, load_config, parse_config

__all__ = [
    "__version__",
    "AlgebraElement",
    "GroupElement",
    "LieAlgebra",
    "Subspace",
    "adjoint",
    "bracket",
    "centralizer",
    "generic_perturb",
    "group_exp",
    "inner",
    "is_generic",
    "joint_centralizer",
    "maximal_torus_through",
    "so",
    "ConvergenceError",
    "DegenerateMetricError",
    "DimensionError",
    "GenericityError",
    "IllConditionedError",
    "NoWitnessError",
    "NotApplicableError",
    "ValidationError",
    "BundleTriple",
    "catalog_triple",
    "fatness_deficit",
    "make_block_triple",
    "MetricSpec",
    "diagonal_metric",
    "identity_metric",
    "interpolated_collapse_metric",
    "random_spd_metric",
    "CurvatureSample",
    "fiber_curvature",
    "group_curvature",
    "sectional",
    "ScanResult",
    "SweepRow",
    "ZeroPlaneCertificate",
    "certify_zero_plane",
    "curvature_scan",
    "find_commuting_pair",
    "maximize_orbit_form",
    "variation_sweep",
    "zero_curvature_schedule",
    "RunConfig",
    "load_config",
    "parse_config",
]
