"""Input-constraint grammar and point-feasibility checks.

The grammar covers linear rows, convex/declared-nonconvex quadratic rows,
indicator rows guarded by binary auxiliaries, binary products, and auxiliary
variable declarations. It is sized to express pairwise-distance exclusion
constraints (squared-distance rows plus indicators) and symmetry-breaking
helper rows, as well as simple box/sum constraints.

Terms reference design-space features by index. A term on a categorical
feature selects a single label and contributes its coefficient when the
point takes that label (an indicator term).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .space import DesignSpace, FeatureSpec, Point

LE, EQ, GE = "<=", "==", ">="
_SENSES = (LE, EQ, GE)


@dataclass(frozen=True)
class ContTerm:
    """coeff * x[feature] for a continuous feature."""

    feature: int
    coeff: float


@dataclass(frozen=True)
class CatTerm:
    """coeff * 1{x[feature] == label} for a categorical feature."""

    feature: int
    label: int
    coeff: float


@dataclass(frozen=True)
class AuxTerm:
    """coeff * aux[name]."""

    name: str
    coeff: float


Term = ContTerm | CatTerm | AuxTerm


@dataclass(frozen=True)
class AuxVar:
    """Declaration of an auxiliary variable usable in constraint rows."""

    name: str
    kind: str  # "binary" | "nonneg" | "bounded"
    lower: float = 0.0
    upper: float = math.inf

    def __post_init__(self):
        if self.kind not in ("binary", "nonneg", "bounded"):
            raise ValueError(f"aux {self.name}: unknown kind {self.kind!r}")
        if self.kind == "bounded" and not self.lower <= self.upper:
            raise ValueError(f"aux {self.name}: empty bound interval")

    @property
    def bounds(self) -> tuple[float, float]:
        if self.kind == "binary":
            return (0.0, 1.0)
        if self.kind == "nonneg":
            return (0.0, math.inf)
        return (self.lower, self.upper)


@dataclass(frozen=True)
class Linear:
    """sum(terms) <sense> rhs."""

    terms: tuple[Term, ...]
    sense: str
    rhs: float
    name: str = ""

    def __post_init__(self):
        if self.sense not in _SENSES:
            raise ValueError(f"row {self.name}: bad sense {self.sense!r}")


@dataclass(frozen=True)
class Quadratic:
    """sum(quad coeff * a * b) + sum(linear terms) <= rhs.

    Only the <= sense is allowed. Rows whose quadratic part is not positive
    semidefinite must be declared with ``nonconvex=True``.
    """

    quad: tuple[tuple[Term, Term, float], ...]
    terms: tuple[Term, ...]
    rhs: float
    nonconvex: bool = False
    name: str = ""

    def __post_init__(self):
        for a, b, _ in self.quad:
            if isinstance(a, CatTerm) or isinstance(b, CatTerm):
                raise ValueError(f"row {self.name}: quadratic terms on categorical features")


@dataclass(frozen=True)
class Indicator:
    """guard == polarity  implies  the linear row holds."""

    guard: str
    polarity: bool
    then: Linear
    name: str = ""


@dataclass(frozen=True)
class BinaryProduct:
    """result = a * b over declared binary auxiliaries."""

    result: str
    a: str
    b: str
    name: str = ""


Constraint = Linear | Quadratic | Indicator | BinaryProduct | AuxVar


def validate_constraints(constraints: tuple[Constraint, ...], features) -> None:
    aux = {c.name: c for c in constraints if isinstance(c, AuxVar)}

    def check_term(t: Term, row: str) -> None:
        if isinstance(t, ContTerm):
            if not 0 <= t.feature < len(features) or not features[t.feature].is_continuous:
                raise ValueError(f"row {row}: bad continuous feature ref {t.feature}")
        elif isinstance(t, CatTerm):
            if not 0 <= t.feature < len(features) or features[t.feature].is_continuous:
                raise ValueError(f"row {row}: bad categorical feature ref {t.feature}")
            if not 0 <= t.label < features[t.feature].n_labels:
                raise ValueError(f"row {row}: label {t.label} out of range")
        else:
            if t.name not in aux:
                raise ValueError(f"row {row}: undeclared aux {t.name!r}")

    for c in constraints:
        if isinstance(c, Linear):
            for t in c.terms:
                check_term(t, c.name)
        elif isinstance(c, Quadratic):
            for a, b, _ in c.quad:
                check_term(a, c.name)
                check_term(b, c.name)
            for t in c.terms:
                check_term(t, c.name)
        elif isinstance(c, Indicator):
            g = aux.get(c.guard)
            if g is None or g.kind != "binary":
                raise ValueError(f"row {c.name}: indicator guard must be a declared binary aux")
            for t in c.then.terms:
                check_term(t, c.name)
        elif isinstance(c, BinaryProduct):
            for nm in (c.result, c.a, c.b):
                g = aux.get(nm)
                if g is None or g.kind != "binary":
                    raise ValueError(f"row {c.name}: product over non-binary aux {nm!r}")


def _term_value(t: Term, point: "Point") -> float:
    if isinstance(t, ContTerm):
        return t.coeff * point.values[t.feature]
    if isinstance(t, CatTerm):
        return t.coeff * (1.0 if int(point.values[t.feature]) == t.label else 0.0)
    v = point.aux.get(t.name)
    if v is None:
        raise KeyError(f"aux {t.name!r} missing from point")
    return t.coeff * v


@functools.lru_cache(maxsize=None)
def row_norm(c: Constraint) -> float:
    """Coefficient scale used for feasibility tolerances, floored at 1."""
    coeffs: list[float] = []
    if isinstance(c, Linear):
        coeffs = [t.coeff for t in c.terms]
    elif isinstance(c, Quadratic):
        coeffs = [q for *_, q in c.quad] + [t.coeff for t in c.terms]
    elif isinstance(c, Indicator):
        coeffs = [t.coeff for t in c.then.terms]
    elif isinstance(c, BinaryProduct):
        coeffs = [1.0]
    return max(1.0, math.sqrt(sum(x * x for x in coeffs)))


def row_violation(c: Constraint, point: "Point") -> float:
    """Unscaled violation amount of one row at a point (0 when satisfied)."""
    if isinstance(c, AuxVar):
        v = point.aux.get(c.name)
        if v is None:
            return 0.0
        lo, hi = c.bounds
        viol = max(0.0, lo - v, v - hi)
        if c.kind == "binary":
            viol = max(viol, min(abs(v), abs(v - 1.0)))
        return viol
    if isinstance(c, Linear):
        lhs = sum(_term_value(t, point) for t in c.terms)
        if c.sense == LE:
            return max(0.0, lhs - c.rhs)
        if c.sense == GE:
            return max(0.0, c.rhs - lhs)
        return abs(lhs - c.rhs)
    if isinstance(c, Quadratic):
        lhs = sum(q * _term_raw(a, point) * _term_raw(b, point) for a, b, q in c.quad)
        lhs += sum(_term_value(t, point) for t in c.terms)
        return max(0.0, lhs - c.rhs)
    if isinstance(c, Indicator):
        g = point.aux.get(c.guard)
        if g is None:
            raise KeyError(f"indicator guard {c.guard!r} missing from point")
        active = (g > 0.5) == c.polarity
        return row_violation(c.then, point) if active else 0.0
    if isinstance(c, BinaryProduct):
        r = point.aux.get(c.result)
        a = point.aux.get(c.a)
        b = point.aux.get(c.b)
        if None in (r, a, b):
            raise KeyError(f"product row {c.name}: aux values missing")
        return abs(r - a * b)
    raise TypeError(f"unknown constraint {type(c)}")


def _term_raw(t: Term, point: "Point") -> float:
    if isinstance(t, ContTerm):
        return point.values[t.feature]
    if isinstance(t, AuxTerm):
        v = point.aux.get(t.name)
        if v is None:
            raise KeyError(f"aux {t.name!r} missing from point")
        return v
    raise TypeError("categorical term in quadratic position")


def violations(space: "DesignSpace", point: "Point", feas_tol: float = 1e-6):
    """All rows violated beyond the scaled tolerance, as (name, amount) pairs.

    Tolerance for boundary points is ``feas_tol`` scaled by the row's
    coefficient norm, so proposals exactly on a constraint boundary count
    as feasible.
    """
    out = []
    for c in space.constraints:
        v = row_violation(c, point)
        if v > feas_tol * row_norm(c):
            out.append((getattr(c, "name", "") or type(c).__name__, v))
    return out


def is_feasible(space: "DesignSpace", point: "Point", feas_tol: float = 1e-6) -> bool:
    if not space.contains(point, tol=feas_tol):
        return False
    return not violations(space, point, feas_tol)


def total_violation(space: "DesignSpace", point: "Point") -> float:
    """Sum of raw violation amounts; the constraint-domination measure."""
    total = 0.0
    for c in space.constraints:
        total += row_violation(c, point)
    for f, v in zip(space.features, point.values):
        if f.is_continuous:
            total += max(0.0, f.lower - v, v - f.upper)
    return total
