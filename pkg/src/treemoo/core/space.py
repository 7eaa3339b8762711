"""Design-space declarations: feature specs, points, datasets.

The design space is the single source of truth for the number of input
dimensions, which of them are continuous vs. categorical, and which input
constraints a proposal must satisfy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .constraints import Constraint, AuxVar, validate_constraints


@dataclass(frozen=True)
class ContinuousFeature:
    """Real-valued input with inclusive bounds, in problem units."""

    name: str
    lower: float
    upper: float

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ValueError(f"feature {self.name}: bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(
                f"feature {self.name}: lower {self.lower} must be < upper {self.upper}"
            )

    @property
    def is_continuous(self) -> bool:
        return True

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class CategoricalFeature:
    """Nominal input taking one of a fixed, ordered list of labels."""

    name: str
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) == 0:
            raise ValueError(f"feature {self.name}: label list must be non-empty")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"feature {self.name}: duplicate labels")

    @property
    def is_continuous(self) -> bool:
        return False

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"feature {self.name}: unknown label {label!r}") from None


FeatureSpec = ContinuousFeature | CategoricalFeature


@dataclass(frozen=True)
class DesignSpace:
    """Ordered feature declarations plus the input constraint set."""

    features: tuple[FeatureSpec, ...]
    constraints: tuple[Constraint, ...] = ()

    def __post_init__(self):
        if len(self.features) == 0:
            raise ValueError("design space needs at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("duplicate feature names")
        validate_constraints(self.constraints, self.features)

    @property
    def n(self) -> int:
        return len(self.features)

    @property
    def continuous_indices(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.features) if f.is_continuous)

    @property
    def categorical_indices(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.features) if not f.is_continuous)

    @property
    def aux_vars(self) -> tuple[AuxVar, ...]:
        return tuple(c for c in self.constraints if isinstance(c, AuxVar))

    def feature(self, i: int) -> FeatureSpec:
        return self.features[i]

    def contains(self, point: "Point", tol: float = 0.0) -> bool:
        """Bounds-and-label check only; constraint rows are checked separately."""
        if len(point.values) != self.n:
            return False
        for f, v in zip(self.features, point.values):
            if f.is_continuous:
                if not (f.lower - tol <= v <= f.upper + tol):
                    return False
            else:
                iv = int(v)
                if iv != v or not (0 <= iv < f.n_labels):
                    return False
        return True


@dataclass(frozen=True)
class Point:
    """A single design-space assignment.

    ``values`` holds one entry per feature: a float for continuous features
    and an integer label index for categorical ones. ``aux`` optionally
    carries values of auxiliary constraint variables (e.g. distance
    auxiliaries), keyed by name.
    """

    values: tuple[float, ...]
    aux: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def continuous(self, space: DesignSpace) -> np.ndarray:
        return np.array([self.values[i] for i in space.continuous_indices], dtype=float)

    def labels(self, space: DesignSpace) -> np.ndarray:
        return np.array(
            [int(self.values[i]) for i in space.categorical_indices], dtype=int
        )

    def as_vector(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


class DataSet:
    """Aligned inputs and targets: the evaluated points and their objectives.

    Targets follow the minimization convention of the optimizer; callers are
    responsible for negating maximization objectives before insertion.
    """

    def __init__(self, space: DesignSpace, n_objectives: int):
        if n_objectives < 1:
            raise ValueError("need at least one objective")
        self.space = space
        self.n_objectives = n_objectives
        self.points: list[Point] = []
        self._targets: list[np.ndarray] = []

    def __len__(self) -> int:
        return len(self.points)

    def append(self, point: Point, y: Sequence[float]) -> None:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n_objectives,):
            raise ValueError(f"target shape {y.shape} != ({self.n_objectives},)")
        if not np.all(np.isfinite(y)):
            raise ValueError("targets must be finite")
        if not self.space.contains(point, tol=1e-9):
            raise ValueError("point is outside the design space")
        self.points.append(point)
        self._targets.append(y)

    @property
    def targets(self) -> np.ndarray:
        if not self._targets:
            return np.zeros((0, self.n_objectives))
        return np.vstack(self._targets)

    def encoded_matrix(self) -> np.ndarray:
        """|D| x n matrix: continuous values raw, categorical as label index."""
        if not self.points:
            return np.zeros((0, self.space.n))
        return np.vstack([p.as_vector() for p in self.points])

    def find_duplicate(self, point: Point) -> int | None:
        """Index of an existing point with identical encoded values, if any."""
        v = point.as_vector()
        for i, p in enumerate(self.points):
            if np.array_equal(p.as_vector(), v):
                return i
        return None
