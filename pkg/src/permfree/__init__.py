"""Forbidden-intersection families of permutations: predicates, degree
decomposition, spreadness, extremal search and exact bounds."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CapacityError,
    DimensionError,
    DomainError,
    NumericError,
    ParseError,
    PatternError,
    PermfreeError,
)
from .perm_core import (  # noqa: E402
    Permutation,
    PermFamily,
    RestrictionPattern,
    SubSpace,
    antipodal_pair,
    count_with_fixed_points,
    intersection_size,
    is_cross_free,
    restrict,
    umvirate,
)
