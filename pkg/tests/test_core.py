"""Domain-type tests: dominance, archive, hypervolume, constraint grammar."""

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from treemoo.core import (
    AuxTerm,
    AuxVar,
    CatTerm,
    CategoricalFeature,
    ContTerm,
    ContinuousFeature,
    DesignSpace,
    Indicator,
    Linear,
    ParetoArchive,
    Point,
    Quadratic,
    dominates,
    hypervolume_2d,
    is_feasible,
    violations,
)


class TestDominates:
    def test_strict_improvement(self):
        assert dominates((1, 2), (2, 2))

    def test_equal_vectors(self):
        assert not dominates((1, 2), (1, 2))

    def test_incomparable(self):
        assert not dominates((1, 3), (2, 2))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            dominates((1, 2), (1, 2, 3))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            dominates((np.inf, 0), (1, 1))

    @given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=3, max_size=3))
    def test_strict_partial_order(self, vecs):
        a, b, c = vecs
        assert not dominates(a, a)  # irreflexive
        if dominates(a, b) and dominates(b, c):
            assert dominates(a, c)  # transitive


class TestArchive:
    def test_insert_nondominated(self):
        arch = ParetoArchive(2)
        arch.insert(Point((0,)), (1, 4))
        arch.insert(Point((0,)), (4, 1))
        assert arch.insert(Point((0,)), (3, 3))
        got = sorted(tuple(y) for _, y in arch.entries)
        assert got == [(1.0, 4.0), (3.0, 3.0), (4.0, 1.0)]

    def test_insert_dominated(self):
        arch = ParetoArchive(2)
        arch.insert(Point((0,)), (1, 4))
        arch.insert(Point((0,)), (4, 1))
        assert not arch.insert(Point((0,)), (5, 5))
        assert len(arch) == 2

    def test_insert_dominating_all(self):
        arch = ParetoArchive(2)
        arch.insert(Point((0,)), (1, 4))
        arch.insert(Point((0,)), (4, 1))
        assert arch.insert(Point((0,)), (0, 0))
        assert [tuple(y) for _, y in arch.entries] == [(0.0, 0.0)]

    def test_duplicate_rejected(self):
        arch = ParetoArchive(2)
        assert arch.insert(Point((0,)), (1, 1))
        assert not arch.insert(Point((1,)), (1, 1))

    def test_order_insensitive(self):
        rng = np.random.default_rng(7)
        pts = [tuple(v) for v in rng.integers(0, 6, size=(12, 2))]
        finals = set()
        for perm in itertools.islice(itertools.permutations(pts), 0, 720, 60):
            arch = ParetoArchive(2)
            for y in perm:
                arch.insert(Point((0,)), y)
            finals.add(frozenset(tuple(v) for _, v in arch.entries))
        assert len(finals) == 1


class TestHypervolume:
    def test_unit_square(self):
        assert hypervolume_2d(np.array([[0.0, 0.0]]), (1, 1)) == pytest.approx(1.0)

    def test_staircase(self):
        front = np.array([[0.0, 0.5], [0.5, 0.0]])
        assert hypervolume_2d(front, (1, 1)) == pytest.approx(0.75)

    def test_empty(self):
        assert hypervolume_2d(np.zeros((0, 2)), (1, 1)) == 0.0

    def test_entry_beyond_reference(self):
        with pytest.raises(ValueError):
            hypervolume_2d(np.array([[2.0, 0.0]]), (1, 1))

    def test_unsupported_dimension(self):
        with pytest.raises(ValueError):
            hypervolume_2d(np.array([[0.0, 0.0, 0.0]]), (1, 1, 1))

    def test_monotone_under_insertion(self):
        rng = np.random.default_rng(3)
        arch = ParetoArchive(2, reference_point=(1, 1))
        last = 0.0
        for y in rng.uniform(0, 1, size=(40, 2)):
            arch.insert(Point((0,)), y)
            hv = arch.hypervolume()
            assert hv >= last - 1e-12
            last = hv


def _toy_space(constraints=()):
    return DesignSpace(
        (
            ContinuousFeature("x", 0.0, 2.0),
            CategoricalFeature("c", ("a", "b")),
        ),
        tuple(constraints),
    )


class TestConstraints:
    def test_linear_violation(self):
        space = _toy_space([Linear((ContTerm(0, 1.0),), "<=", 1.0, name="cap")])
        assert is_feasible(space, Point((0.5, 0)))
        bad = violations(space, Point((1.5, 0)))
        assert bad and bad[0][0] == "cap"

    def test_boundary_is_feasible(self):
        space = _toy_space([Linear((ContTerm(0, 1.0),), "<=", 1.0)])
        assert is_feasible(space, Point((1.0 + 1e-9, 0)))

    def test_cat_term(self):
        space = _toy_space([Linear((ContTerm(0, 1.0), CatTerm(1, 1, 10.0)), "<=", 5.0)])
        assert is_feasible(space, Point((1.0, 0)))
        assert not is_feasible(space, Point((1.0, 1)))

    def test_indicator_requires_binary_guard(self):
        with pytest.raises(ValueError):
            _toy_space(
                [
                    AuxVar("g", "nonneg"),
                    Indicator("g", True, Linear((ContTerm(0, 1.0),), "<=", 1.0)),
                ]
            )

    def test_indicator_active_inactive(self):
        space = _toy_space(
            [
                AuxVar("g", "binary"),
                Indicator("g", True, Linear((ContTerm(0, 1.0),), "<=", 1.0)),
            ]
        )
        assert is_feasible(space, Point((1.5, 0), {"g": 0.0}))
        assert not is_feasible(space, Point((1.5, 0), {"g": 1.0}))

    def test_quadratic_rejects_categorical_terms(self):
        with pytest.raises(ValueError):
            Quadratic(((CatTerm(1, 0, 1.0), CatTerm(1, 0, 1.0), 1.0),), (), 1.0)

    def test_quadratic_with_aux(self):
        space = _toy_space(
            [
                AuxVar("d", "bounded", 0.0, 10.0),
                Quadratic(
                    ((AuxTerm("d", 1.0), AuxTerm("d", 1.0), 1.0),
                     (ContTerm(0, 1.0), ContTerm(0, 1.0), -1.0)),
                    (),
                    0.0,
                    nonconvex=True,
                ),
            ]
        )
        assert is_feasible(space, Point((2.0, 0), {"d": 1.5}))
        assert not is_feasible(space, Point((1.0, 0), {"d": 1.5}))

    def test_constraint_references_validated(self):
        with pytest.raises(ValueError):
            _toy_space([Linear((ContTerm(5, 1.0),), "<=", 1.0)])
        with pytest.raises(ValueError):
            _toy_space([Linear((CatTerm(1, 7, 1.0),), "<=", 1.0)])

    def test_feature_invariants(self):
        with pytest.raises(ValueError):
            ContinuousFeature("x", 1.0, 1.0)
        with pytest.raises(ValueError):
            CategoricalFeature("c", ("a", "a"))
        with pytest.raises(ValueError):
            CategoricalFeature("c", ())
