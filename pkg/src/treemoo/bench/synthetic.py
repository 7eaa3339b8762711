"""Analytic bi-objective benchmark functions.

Five unconstrained problems with different Pareto-front geometries:
a concave front, a convex front, a discontinuous front, and two fronts
mixing convex and concave sections. All are minimization problems.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..core import ContinuousFeature, DesignSpace, nondominated_filter


@dataclass(frozen=True)
class SyntheticProblem:
    name: str
    dimension: int
    bounds: tuple[tuple[float, float], ...]
    evaluator: Callable[[np.ndarray], tuple[float, float]]
    output_bounds: tuple[tuple[float, float], tuple[float, float]]

    def space(self) -> DesignSpace:
        feats = tuple(
            ContinuousFeature(f"x{i + 1}", lo, hi) for i, (lo, hi) in enumerate(self.bounds)
        )
        return DesignSpace(feats)

    def evaluate(self, x: np.ndarray) -> tuple[float, float]:
        x = np.asarray(x, dtype=float)
        for v, (lo, hi) in zip(x, self.bounds):
            if not lo - 1e-9 <= v <= hi + 1e-9:
                raise ValueError(f"{self.name}: input {v} outside [{lo}, {hi}]")
        return self.evaluator(x)

    @property
    def reference_point(self) -> tuple[float, float]:
        """Componentwise maxima of the stated output bounds (for VR/HV)."""
        return (self.output_bounds[0][1], self.output_bounds[1][1])


def _fonseca(x: np.ndarray) -> tuple[float, float]:
    d = len(x)
    shift = 1.0 / np.sqrt(d)
    f1 = 1.0 - np.exp(-np.sum((x - shift) ** 2))
    f2 = 1.0 - np.exp(-np.sum((x + shift) ** 2))
    return float(f1), float(f2)


def _schaffer(x: np.ndarray) -> tuple[float, float]:
    v = float(x[0])
    return v * v, (v - 2.0) ** 2


def _kursawe(x: np.ndarray) -> tuple[float, float]:
    f1 = np.sum(-10.0 * np.exp(-0.2 * np.sqrt(x[:-1] ** 2 + x[1:] ** 2)))
    f2 = np.sum(np.abs(x) ** 0.8 + 5.0 * np.sin(x**3))
    return float(f1), float(f2)


def _s_shaped(sign: float) -> Callable[[np.ndarray], tuple[float, float]]:
    def f(x: np.ndarray) -> tuple[float, float]:
        f1 = float(x[0])
        f2 = 10.0 - x[0] + x[1] + sign * np.sin(x[0])
        return f1, float(f2)

    return f


SYNTHETIC_PROBLEMS: dict[str, SyntheticProblem] = {
    "fonseca_fleming": SyntheticProblem(
        "fonseca_fleming", 2, (((-4.0, 4.0),) * 2), _fonseca, ((0.0, 1.0), (0.0, 1.0))
    ),
    "schaffer": SyntheticProblem(
        "schaffer", 1, ((-3.0, 3.0),), _schaffer, ((0.0, 9.0), (0.0, 25.0))
    ),
    "kursawe": SyntheticProblem(
        "kursawe", 3, (((-5.0, 5.0),) * 3), _kursawe, ((-20.0, -4.0), (-12.0, 25.0))
    ),
    "s_plus": SyntheticProblem(
        "s_plus", 2, (((0.0, 10.0),) * 2), _s_shaped(+1.0), ((0.0, 10.0), (-1.0, 12.0))
    ),
    "s_minus": SyntheticProblem(
        "s_minus", 2, (((0.0, 10.0),) * 2), _s_shaped(-1.0), ((0.0, 10.0), (-1.0, 12.0))
    ),
}


def true_front(name: str, n_samples: int = 200_000) -> np.ndarray:
    """Dense deterministic sweep of the inputs followed by a non-dominated filter.

    The grid is even per dimension with roughly ``n_samples`` total points;
    the result is oracle-grade at desk scale and reproducible bit-for-bit.
    """
    if n_samples < 1:
        raise ValueError("sample count must be positive")
    problem = SYNTHETIC_PROBLEMS[name]
    d = problem.dimension
    per_dim = max(2, int(round(n_samples ** (1.0 / d))))
    axes = [np.linspace(lo, hi, per_dim) for lo, hi in problem.bounds]
    grids = np.meshgrid(*axes, indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=1)
    F = _vector_eval(name, X)
    return nondominated_filter(F)


def _vector_eval(name: str, X: np.ndarray) -> np.ndarray:
    if name == "fonseca_fleming":
        d = X.shape[1]
        shift = 1.0 / np.sqrt(d)
        f1 = 1.0 - np.exp(-np.sum((X - shift) ** 2, axis=1))
        f2 = 1.0 - np.exp(-np.sum((X + shift) ** 2, axis=1))
    elif name == "schaffer":
        f1 = X[:, 0] ** 2
        f2 = (X[:, 0] - 2.0) ** 2
    elif name == "kursawe":
        f1 = np.sum(-10.0 * np.exp(-0.2 * np.sqrt(X[:, :-1] ** 2 + X[:, 1:] ** 2)), axis=1)
        f2 = np.sum(np.abs(X) ** 0.8 + 5.0 * np.sin(X**3), axis=1)
    elif name in ("s_plus", "s_minus"):
        sign = 1.0 if name == "s_plus" else -1.0
        f1 = X[:, 0]
        f2 = 10.0 - X[:, 0] + X[:, 1] + sign * np.sin(X[:, 0])
    else:
        raise KeyError(f"unknown synthetic problem {name!r}")
    return np.stack([f1, f2], axis=1)
