"""Shared domain types: design space, constraint grammar, datasets, archive."""

from .constraints import (
    AuxTerm,
    AuxVar,
    BinaryProduct,
    CatTerm,
    Constraint,
    ContTerm,
    Indicator,
    Linear,
    Quadratic,
    is_feasible,
    row_violation,
    total_violation,
    violations,
)
from .pareto import ParetoArchive, dominates, hypervolume_2d, nondominated_filter
from .space import (
    CategoricalFeature,
    ContinuousFeature,
    DataSet,
    DesignSpace,
    FeatureSpec,
    Point,
)

__all__ = [
    "AuxTerm",
    "AuxVar",
    "BinaryProduct",
    "CatTerm",
    "CategoricalFeature",
    "Constraint",
    "ContTerm",
    "ContinuousFeature",
    "DataSet",
    "DesignSpace",
    "FeatureSpec",
    "Indicator",
    "Linear",
    "ParetoArchive",
    "Point",
    "Quadratic",
    "dominates",
    "hypervolume_2d",
    "is_feasible",
    "nondominated_filter",
    "row_violation",
    "total_violation",
    "violations",
]
