"""Regular functions on a disk: level structure, mu-length and rectifying homeomorphisms."""

from .conjugacy import BoundaryMap, ConjugacyReport, conjugate, verify_conjugacy
from .curves import MuParamCurve, Polyline, frechet, mu_length, mu_n, mu_parameterize, resample_by_mu
from .domain import DomainShape, ScalarField, boundary_samples, evaluate, gradient, load_field, make_field, save_field
from .errors import (
    ClosedLevelError,
    ConjugacyError,
    DecompositionError,
    FieldError,
    LevelStructureError,
    OutsideDomainError,
    RectifyError,
    TrajectoryError,
)
from .levelsets import LevelCurve, LevelFamily, extract_level, frechet_continuity_profile, level_family
from .rectify import (
    Band,
    BandChart,
    DiscreteHomeomorphism,
    band_chart,
    invert,
    rectify_affine,
    rectify_auto,
    rectify_band,
    rectify_disk,
    rectify_half_disk,
    rectify_square,
)
from .regularity import (
    BoundaryDecomposition,
    RegularityVerdict,
    UTrajectory,
    check_elc,
    classify,
    decompose_boundary,
    trace_u_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "Band",
    "BandChart",
    "BoundaryDecomposition",
    "BoundaryMap",
    "ClosedLevelError",
    "ConjugacyError",
    "ConjugacyReport",
    "DecompositionError",
    "DiscreteHomeomorphism",
    "DomainShape",
    "FieldError",
    "LevelCurve",
    "LevelFamily",
    "LevelStructureError",
    "MuParamCurve",
    "OutsideDomainError",
    "Polyline",
    "RectifyError",
    "RegularityVerdict",
    "ScalarField",
    "TrajectoryError",
    "UTrajectory",
    "band_chart",
    "boundary_samples",
    "check_elc",
    "classify",
    "conjugate",
    "decompose_boundary",
    "evaluate",
    "extract_level",
    "frechet",
    "frechet_continuity_profile",
    "gradient",
    "invert",
    "level_family",
    "load_field",
    "make_field",
    "mu_length",
    "mu_n",
    "mu_parameterize",
    "rectify_affine",
    "rectify_auto",
    "rectify_band",
    "rectify_disk",
    "rectify_half_disk",
    "rectify_square",
    "resample_by_mu",
    "save_field",
    "trace_u_trajectory",
    "verify_conjugacy",
    "__version__",
]
