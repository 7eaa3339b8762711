"""Categorical similarity measure tests."""

import numpy as np
import pytest

from treemoo.core import CategoricalFeature, ContinuousFeature, DesignSpace
from treemoo.similarity import SimilarityTable


def _space():
    return DesignSpace(
        (
            ContinuousFeature("x", 0.0, 1.0),
            CategoricalFeature("c", ("red", "green", "blue")),
        )
    )


def _table(labels, measure="goodall4"):
    X = np.column_stack([np.zeros(len(labels)), np.array(labels, dtype=float)])
    return SimilarityTable(_space(), X, measure)


class TestOverlap:
    def test_identical(self):
        assert _table([0, 1], "overlap").overlap(1, 0, 0) == 1.0

    def test_different(self):
        assert _table([0, 1], "overlap").overlap(1, 0, 2) == 0.0

    def test_unknown_label(self):
        with pytest.raises(KeyError):
            _table([0, 1]).overlap(1, 0, 9)

    def test_range(self):
        t = _table([0, 1, 2, 2], "overlap")
        vals = {t.overlap(1, a, b) for a in range(3) for b in range(3)}
        assert vals <= {0.0, 1.0}


class TestPSquared:
    def test_direct_value(self):
        # counts {a: 2, b: 1}, |D| = 3 -> p2(a) = 2*1/(3*2)
        t = _table([0, 0, 1])
        assert t.p_squared(1, 0) == pytest.approx(1 / 3)

    def test_absent_label_zero(self):
        assert _table([0, 0, 1]).p_squared(1, 2) == 0.0

    def test_all_same_label_one(self):
        assert _table([2, 2, 2, 2]).p_squared(1, 2) == 1.0

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            _table([0]).p_squared(1, 0)


class TestGoodall4:
    def test_match_uses_p_squared(self):
        assert _table([0, 0, 1]).goodall4(1, 0, 0) == pytest.approx(1 / 3)

    def test_mismatch_zero(self):
        assert _table([0, 0, 1]).goodall4(1, 0, 1) == 0.0

    def test_singleton_label_zero_self_similarity(self):
        assert _table([0, 0, 1]).goodall4(1, 1, 1) == 0.0

    def test_frequency_ordering(self):
        # more frequent labels have larger self-similarity
        t = _table([0, 0, 0, 1, 1, 2])
        assert t.goodall4(1, 0, 0) > t.goodall4(1, 1, 1) > t.goodall4(1, 2, 2)

    def test_symmetry_and_bounds(self):
        t = _table([0, 1, 2, 0, 1, 0])
        for a in range(3):
            for b in range(3):
                s = t.goodall4(1, a, b)
                assert s == t.goodall4(1, b, a)
                assert 0.0 <= s <= 1.0


def test_dissimilarity_coeff_table():
    t = _table([0, 0, 1])
    labels = np.array([[0], [0], [1]])
    coeffs = t.dissimilarity_coeffs(labels)
    assert coeffs.shape == (3, 1, 3)
    # matching the observed label of point 0 earns 1 - p2(0)
    assert coeffs[0, 0, 0] == pytest.approx(1 - 1 / 3)
    # any other label earns the full reward
    assert coeffs[0, 0, 1] == 1.0
    assert coeffs[2, 0, 1] == pytest.approx(1.0)  # count(b)=1 -> p2 = 0
