"""Pareto-front quality metrics: GD, IGD, MPFE, and the volume ratio.

All metrics are computed in raw objective units; report formatting may
rescale (e.g. GD x 100) but the functions here do not.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core.pareto import clipped_hypervolume_2d


@dataclass(frozen=True)
class FrontSample:
    """A set of objective vectors with provenance metadata."""

    points: np.ndarray
    provenance: str = "run_archive"  # or "true_front_reference"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or len(pts) == 0:
            raise ValueError("front must be a non-empty 2-D array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("front entries must be finite")
        object.__setattr__(self, "points", pts)


def _as_front(front) -> np.ndarray:
    if isinstance(front, FrontSample):
        return front.points
    pts = np.asarray(front, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("front must be a non-empty 2-D array")
    return pts


def _min_dists(from_pts: np.ndarray, to_pts: np.ndarray) -> np.ndarray:
    diff = from_pts[:, None, :] - to_pts[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2)).min(axis=1)


def gd(approx, true) -> float:
    """Mean distance from approximate-front points to the true front."""
    pa, pt = _as_front(approx), _as_front(true)
    return float(_min_dists(pa, pt).mean())


def igd(approx, true) -> float:
    """Mean distance from true-front points to the approximate front."""
    pa, pt = _as_front(approx), _as_front(true)
    return float(_min_dists(pt, pa).mean())


def mpfe(approx, true) -> float:
    """Worst-case distance from the true front to the approximate front."""
    pa, pt = _as_front(approx), _as_front(true)
    return float(_min_dists(pt, pa).max())


def vr(approx, true, reference_point) -> float:
    """-log(1 - Vol(approx)/Vol(true)) with a shared reference point.

    Points beyond the reference contribute no volume. When the approximate
    volume reaches the true volume the ratio is undefined; +inf is returned
    with a warning.
    """
    pa, pt = _as_front(approx), _as_front(true)
    ref = np.asarray(reference_point, dtype=float)
    vol_true = clipped_hypervolume_2d(pt, ref)
    if vol_true <= 0.0:
        raise ValueError("true front has zero bounded hypervolume")
    vol_a = clipped_hypervolume_2d(pa, ref)
    ratio = vol_a / vol_true
    if ratio >= 1.0:
        warnings.warn("approximate front matches the true front; VR undefined")
        return math.inf
    return float(-math.log(1.0 - ratio))
