"""Categorical similarity measures feeding the exploration term.

Two measures are supported: plain overlap (1 for identical labels, else 0)
and Goodall4, which scores a label match by the squared frequency estimate
of that label in the data set. Rarer labels get smaller self-similarity and
therefore a larger 1 - S exploration reward.
"""

from __future__ import annotations

import numpy as np

from .core import DesignSpace

MEASURES = ("overlap", "goodall4")


class SimilarityTable:
    """Per-feature label counts and similarity coefficients for one dataset.

    Tables are cheap to build at desk scale and are recomputed from scratch
    whenever the dataset changes; instances are immutable after construction.
    """

    def __init__(self, space: DesignSpace, X: np.ndarray, measure: str = "goodall4"):
        if measure not in MEASURES:
            raise ValueError(f"unknown similarity measure {measure!r}")
        self.space = space
        self.measure = measure
        self.cat_indices = space.categorical_indices
        self.n_data = int(X.shape[0]) if X.size else 0
        self.counts: dict[int, np.ndarray] = {}
        for i in self.cat_indices:
            k = space.features[i].n_labels
            col = X[:, i].astype(int) if self.n_data else np.zeros(0, dtype=int)
            self.counts[i] = np.bincount(col, minlength=k).astype(float)

    def _check_label(self, feature: int, label: int) -> None:
        if feature not in self.counts:
            raise KeyError(f"feature {feature} is not categorical")
        if not 0 <= label < self.space.features[feature].n_labels:
            raise KeyError(f"unknown label {label} for feature {feature}")

    def overlap(self, feature: int, a: int, b: int) -> float:
        self._check_label(feature, a)
        self._check_label(feature, b)
        return 1.0 if a == b else 0.0

    def p_squared(self, feature: int, label: int) -> float:
        """count(j)(count(j)-1) / (|D|(|D|-1)); needs at least two points."""
        self._check_label(feature, label)
        d = self.n_data
        if d < 2:
            raise ValueError("p_squared needs a dataset with |D| >= 2")
        c = self.counts[feature][label]
        return float(c * (c - 1.0) / (d * (d - 1.0)))

    def goodall4(self, feature: int, a: int, b: int) -> float:
        self._check_label(feature, a)
        self._check_label(feature, b)
        if a != b:
            return 0.0
        return self.p_squared(feature, a)

    def similarity(self, feature: int, a: int, b: int) -> float:
        if self.measure == "overlap":
            return self.overlap(feature, a, b)
        return self.goodall4(feature, a, b)

    def dissimilarity_coeffs(self, labels_matrix: np.ndarray) -> np.ndarray:
        """(|D|, n_cat, K_max) array of 1 - S(observed label, candidate label).

        Entry [d, c, j] is the exploration coefficient earned by proposing
        label j for the c-th categorical feature, measured against data
        point d. Slots beyond a feature's label count are zero.
        """
        n_d = labels_matrix.shape[0]
        n_cat = len(self.cat_indices)
        k_max = max((self.space.features[i].n_labels for i in self.cat_indices), default=0)
        out = np.zeros((n_d, n_cat, k_max))
        for c, i in enumerate(self.cat_indices):
            k = self.space.features[i].n_labels
            obs = labels_matrix[:, c].astype(int)
            if self.measure == "overlap":
                coeff = np.ones((n_d, k))
                coeff[np.arange(n_d), obs] = 0.0
            else:
                coeff = np.ones((n_d, k))
                p2 = np.array([self.p_squared(i, j) for j in range(k)])
                coeff[np.arange(n_d), obs] = 1.0 - p2[obs]
            out[:, c, :k] = coeff
        return out
