"""Pareto dominance, the non-dominated archive, and 2-D hypervolume.

Minimization convention throughout: a vector dominates another when it is
componentwise <= with at least one strict improvement.
"""

from __future__ import annotations

import numpy as np

from .space import Point


def dominates(a, b) -> bool:
    """True iff objective vector ``a`` dominates ``b`` (minimization)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("objective vectors must be finite")
    return bool(np.all(a <= b) and np.any(a < b))


class ParetoArchive:
    """Mutually non-dominated set of observed (point, objectives) pairs.

    Exact duplicates of an incumbent objective vector are rejected so the
    archive stays deterministic. Mutation is single-writer; reads are safe
    to share.
    """

    def __init__(self, n_objectives: int, reference_point=None):
        self.n_objectives = n_objectives
        self.entries: list[tuple[Point, np.ndarray]] = []
        self.reference_point = (
            None if reference_point is None else np.asarray(reference_point, dtype=float)
        )
        if self.reference_point is not None and self.reference_point.shape != (n_objectives,):
            raise ValueError("reference point dimension mismatch")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def front(self) -> np.ndarray:
        if not self.entries:
            return np.zeros((0, self.n_objectives))
        return np.vstack([y for _, y in self.entries])

    def insert(self, point: Point, y) -> bool:
        """Insert an observation; returns True iff it entered the archive."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n_objectives,):
            raise ValueError("objective vector dimension mismatch")
        if not np.all(np.isfinite(y)):
            raise ValueError("objective vector must be finite")
        for _, incumbent in self.entries:
            if np.array_equal(incumbent, y) or dominates(incumbent, y):
                return False
        self.entries = [(p, v) for p, v in self.entries if not dominates(y, v)]
        self.entries.append((point, y.copy()))
        return True

    def hypervolume(self, reference_point=None) -> float:
        ref = self.reference_point if reference_point is None else np.asarray(reference_point, dtype=float)
        if ref is None:
            raise ValueError("no reference point configured")
        return hypervolume_2d(self.front, ref)


def hypervolume_2d(front: np.ndarray, reference_point) -> float:
    """Area dominated by ``front`` and bounded above by the reference point.

    Sorted-staircase sum; bi-objective only. Every entry must be weakly
    dominated by no other entry requirement is not enforced here (dominated
    rows simply contribute nothing extra), but entries beyond the reference
    point are a contract violation.
    """
    front = np.asarray(front, dtype=float)
    ref = np.asarray(reference_point, dtype=float)
    if ref.shape != (2,):
        raise ValueError("hypervolume is implemented for 2 objectives only")
    if front.size == 0:
        return 0.0
    if front.shape[1] != 2:
        raise ValueError("hypervolume is implemented for 2 objectives only")
    if np.any(front > ref + 1e-12):
        raise ValueError("archive entry exceeds the reference point")
    order = np.lexsort((front[:, 1], front[:, 0]))
    pts = front[order]
    area = 0.0
    y_prev = ref[1]
    x_prev = None
    for x, y in pts:
        if x_prev is not None and x == x_prev:
            continue  # same x: later rows have larger y, no extra area
        if y < y_prev:
            area += (ref[0] - x) * (y_prev - y)
            y_prev = y
        x_prev = x
    return float(area)


def clipped_hypervolume_2d(front: np.ndarray, reference_point) -> float:
    """Hypervolume counting only entries strictly inside the reference box."""
    front = np.asarray(front, dtype=float)
    ref = np.asarray(reference_point, dtype=float)
    if front.size == 0:
        return 0.0
    inside = np.all(front < ref[None, :], axis=1)
    if not inside.any():
        return 0.0
    return hypervolume_2d(front[inside], ref)


def nondominated_filter(points: np.ndarray) -> np.ndarray:
    """Non-dominated subset of a 2-column objective matrix (minimization)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("expected an (n, 2) matrix")
    if len(pts) == 0:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    keep = []
    best_f2 = np.inf
    prev = None
    for row in pts:
        if prev is not None and row[0] == prev[0] and row[1] == prev[1]:
            continue
        if row[1] < best_f2:
            keep.append(row)
            best_f2 = row[1]
        prev = row
    return np.vstack(keep)
