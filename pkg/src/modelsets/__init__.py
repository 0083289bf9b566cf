"""Exact cut-and-project model sets and their translation-limit semigroup.

The package constructs point patterns from lattice data with exact quadratic
field arithmetic, stratifies internal space by the window's hyperplane family,
and computes the full algebraic picture of the limit transformations acting
on the pattern space: cone-type semigroup, ideals, hull points, and the
action realized as concrete patches.
"""

from .arrangement import FaceSemigroup, cone_type_str, parse_cone_type
from .cps import (
    Face,
    PointPattern,
    Scheme,
    Window,
    generate_pattern,
    load_config,
    reversed_faces,
    scheme_from_config,
    scheme_to_config,
    stabilizer,
    validate_almost_canonical,
)
from .ellis import EllisSystem, HullEllisElement, InternalEllisElement, TorusPoint
from .errors import (
    DegenerateWindowError,
    InvariantViolationError,
    ModelSetsError,
    NoSolutionError,
    QFieldError,
    SingularMatrixError,
    StabilizationError,
    ValidationError,
)
from .hull import HullPoint, act, cut_type, fiber, net_limit_oracle, selector
from .presets import load_preset, preset_config, preset_names
from .qfield import QF, QFMatrix, format_qf, parse_qf
from .subgroup import (
    ClosureDecomposition,
    ConeGeometry,
    FGSubgroup,
    closure_decompose,
    is_dense,
)
from .zmodule import ZModule, hnf, int_kernel, solve_integer

__version__ = "0.1.0"

__all__ = [
    "QF",
    "QFMatrix",
    "format_qf",
    "parse_qf",
    "ZModule",
    "hnf",
    "int_kernel",
    "solve_integer",
    "Face",
    "Scheme",
    "Window",
    "PointPattern",
    "generate_pattern",
    "reversed_faces",
    "stabilizer",
    "validate_almost_canonical",
    "scheme_from_config",
    "scheme_to_config",
    "load_config",
    "FaceSemigroup",
    "cone_type_str",
    "parse_cone_type",
    "FGSubgroup",
    "ClosureDecomposition",
    "ConeGeometry",
    "closure_decompose",
    "is_dense",
    "EllisSystem",
    "TorusPoint",
    "InternalEllisElement",
    "HullEllisElement",
    "HullPoint",
    "cut_type",
    "fiber",
    "selector",
    "act",
    "net_limit_oracle",
    "load_preset",
    "preset_config",
    "preset_names",
    "ModelSetsError",
    "QFieldError",
    "NoSolutionError",
    "SingularMatrixError",
    "ValidationError",
    "DegenerateWindowError",
    "InvariantViolationError",
    "StabilizationError",
]
