"""Encoder tests: tree rows, linking, exploration, epigraph, decode."""

import numpy as np
import pytest

from treemoo.core import CategoricalFeature, ContinuousFeature, DesignSpace, Point
from treemoo.encode import (
    AcquisitionSpec,
    MiqpModel,
    acquisition_value,
    build_acquisition_model,
    check_solution,
    complete_solution,
    decode,
    dump_fixture,
    encode_chebyshev,
    encode_exploration,
    encode_linking,
    encode_tree_ensemble,
    load_fixture,
    model_var_index,
    union_thresholds,
)
from treemoo.gbrt import GbrtConfig, Leaf, SplitNode, Tree, TreeEnsemble, train
from treemoo.similarity import SimilarityTable

from oracles import random_fixture


def _stump_ensemble(space, threshold=0.5, leaves=(1.0, 2.0), n_trees=1):
    trees = [
        Tree([SplitNode(0, threshold, None, 1, 2), Leaf(leaves[0]), Leaf(leaves[1])])
        for _ in range(n_trees)
    ]
    return TreeEnsemble(space, trees, base_score=0.0)


def _line_space():
    return DesignSpace((ContinuousFeature("x", 0.0, 1.0),))


class TestTreeEncoding:
    def test_single_split_forces_leaf(self):
        space = _line_space()
        ens = _stump_ensemble(space)
        model = MiqpModel(space, union_thresholds(space, [ens]))
        mu = encode_tree_ensemble(model, ens, "f0")
        encode_linking(model)
        # nu = 1 (x <= 0.5) forces the left leaf and mu = 1
        sol, _ = complete_solution(model, Point((0.25,)))
        assert sol[mu] == 1.0
        assert not check_solution(model, sol)
        sol, _ = complete_solution(model, Point((0.75,)))
        assert sol[mu] == 2.0
        assert not check_solution(model, sol)

    def test_zero_split_tree(self):
        space = _line_space()
        ens = TreeEnsemble(space, [Tree([Leaf(7.0)])], base_score=0.0)
        model = MiqpModel(space, {0: np.zeros(0)})
        mu = encode_tree_ensemble(model, ens, "f0")
        sol, _ = complete_solution(model, Point((0.4,)))
        assert sol[mu] == 7.0

    def test_shared_indicators_forbid_mixed_leaves(self):
        # two identical trees: predictions are 2 or 4, never 3
        space = _line_space()
        ens = _stump_ensemble(space, n_trees=2)
        model = MiqpModel(space, union_thresholds(space, [ens]))
        mu = encode_tree_ensemble(model, ens, "f0")
        encode_linking(model)
        seen = set()
        for x in (0.1, 0.3, 0.5, 0.51, 0.9):
            sol, _ = complete_solution(model, Point((x,)))
            assert not check_solution(model, sol)
            seen.add(sol[mu])
        assert seen == {2.0, 4.0}

    def test_unknown_threshold_rejected(self):
        space = _line_space()
        ens = _stump_ensemble(space)
        model = MiqpModel(space, {0: np.array([0.3])})  # 0.5 missing
        with pytest.raises(ValueError):
            encode_tree_ensemble(model, ens, "f0")


class TestLinking:
    def test_interval_selection(self):
        space = _line_space()
        model = MiqpModel(space, {0: np.array([0.5])})
        encode_linking(model)
        link = [r for r in model.rows if r.name.startswith("link")]
        assert len(link) == 2
        lo_row = next(r for r in link if r.name.startswith("link_lo"))
        hi_row = next(r for r in link if r.name.startswith("link_hi"))
        x, nu = model.x_var[0], int(model.nu_cont[0][0])

        def ok(row, assign):
            lhs = sum(c * assign[v] for v, c in row.terms)
            return lhs >= row.rhs - 1e-12 if row.sense == ">=" else lhs <= row.rhs + 1e-12

        # nu = 1 -> x in [0, 0.5]
        assert ok(lo_row, {x: 0.0, nu: 1.0}) and ok(hi_row, {x: 0.5, nu: 1.0})
        assert not ok(hi_row, {x: 0.6, nu: 1.0})
        # nu = 0 -> x in [0.5, 1]
        assert ok(lo_row, {x: 0.5, nu: 0.0}) and ok(hi_row, {x: 1.0, nu: 0.0})
        assert not ok(lo_row, {x: 0.4, nu: 0.0})

    def test_no_thresholds_no_rows(self):
        space = _line_space()
        model = MiqpModel(space, {0: np.zeros(0)})
        encode_linking(model)
        assert not [r for r in model.rows if r.name.startswith("link")]


def _explore_model(space, X, measure="goodall4", coeff=1.0):
    model = MiqpModel(space, {i: np.zeros(0) for i in space.continuous_indices})
    table = SimilarityTable(space, X, measure) if space.categorical_indices else None
    encode_exploration(model, X, table, coeff)
    return model


class TestExploration:
    def test_alpha_zero_at_data_point(self):
        space = _line_space()
        model = _explore_model(space, np.array([[0.4]]))
        sol, _ = complete_solution(model, Point((0.4,)))
        assert sol[model.alpha_var] == 0.0
        assert not check_solution(model, sol)

    def test_alpha_one_at_far_end(self):
        space = _line_space()
        model = _explore_model(space, np.array([[0.0]]))
        sol, _ = complete_solution(model, Point((1.0,)))
        assert sol[model.alpha_var] == pytest.approx(1.0)

    def test_pure_categorical_overlap(self):
        space = DesignSpace((CategoricalFeature("c", ("a", "b")),))
        X = np.array([[0.0], [0.0]])
        model = _explore_model(space, X, "overlap")
        sol, _ = complete_solution(model, Point((1,)))
        assert sol[model.alpha_var] == pytest.approx(1.0)
        sol, _ = complete_solution(model, Point((0,)))
        assert sol[model.alpha_var] == 0.0

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            _explore_model(_line_space(), np.zeros((0, 1)))


class TestChebyshev:
    def test_epigraph_rows_and_objective(self):
        space = _line_space()
        ens = _stump_ensemble(space)
        spec = AcquisitionSpec(np.array([1.0, 0.0]), 1.96, np.zeros(2), np.ones(2))
        model = MiqpModel(space, union_thresholds(space, [ens]))
        mus = [encode_tree_ensemble(model, ens, "f0"), encode_tree_ensemble(model, ens, "f1")]
        encode_linking(model)
        encode_exploration(model, np.array([[0.2]]), None, spec.kappa / space.n)
        encode_chebyshev(model, spec, mus)
        rows = [r for r in model.rows if r.name.startswith("cheby")]
        assert len(rows) == 2
        # objective is mu_hat - (kappa/n) * alpha
        terms = dict(model.objective)
        assert terms[model.mu_hat_var] == 1.0
        assert terms[model.alpha_var] == pytest.approx(-1.96 / 1)

    def test_one_hot_weight_reduces_to_single_objective(self):
        space = _line_space()
        ens = _stump_ensemble(space)
        spec = AcquisitionSpec(np.array([1.0, 0.0]), 0.0, np.zeros(2), np.ones(2))
        model = build_acquisition_model(space, [ens, ens], spec, np.array([[0.2]]))
        for x, expect in ((0.25, 1.0), (0.75, 2.0)):
            sol, obj = complete_solution(model, Point((x,)))
            assert obj == pytest.approx(expect)  # normalized by span 1, weight 1

    def test_degenerate_normalization_floor(self):
        spec = AcquisitionSpec(np.array([1.0]), 0.0, np.zeros(1), np.zeros(1))
        assert spec.denominators()[0] == pytest.approx(1e-8)

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            AcquisitionSpec(np.array([0.7, 0.7]), 0.0, np.zeros(2), np.ones(2))


class TestDecode:
    def test_categorical_argmax(self):
        space = DesignSpace((CategoricalFeature("c", ("a", "b", "z")),))
        model = MiqpModel(space, {})
        sol = np.zeros(model.n_vars)
        sol[model.nu_cat[0]] = [0.0, 1.0, 0.0]
        assert decode(model, sol).values == (1.0,)

    def test_no_active_label_is_error(self):
        space = DesignSpace((CategoricalFeature("c", ("a", "b")),))
        model = MiqpModel(space, {})
        sol = np.zeros(model.n_vars)
        with pytest.raises(ValueError):
            decode(model, sol)


def test_encoding_soundness_random_cells():
    """Forced-leaf predictions equal tree-walk predictions cell by cell."""
    rng = np.random.default_rng(11)
    for trial in range(4):
        space, ensembles, X, Y = random_fixture(
            rng, n_cont=2, n_cat=1, n_labels=3, n_data=8, n_trees=3
        )
        spec = AcquisitionSpec(
            np.array([0.5, 0.5]), 1.96, Y.min(axis=0), Y.max(axis=0)
        )
        model = build_acquisition_model(
            space, ensembles, spec, X, SimilarityTable(space, X, "goodall4")
        )
        for _ in range(250):
            vec = np.array(
                [
                    rng.uniform(0, 1),
                    rng.uniform(0, 1),
                    rng.integers(0, 3),
                ]
            )
            sol, _ = complete_solution(model, Point(tuple(vec)))
            for e, mu in enumerate(model.mu_vars):
                assert sol[mu] == pytest.approx(
                    ensembles[e].predict_encoded(vec), abs=1e-9
                )
            assert not check_solution(model, sol)


def test_fixture_round_trip():
    rng = np.random.default_rng(12)
    space, ensembles, X, Y = random_fixture(rng, n_cont=1, n_cat=1, n_labels=2, n_data=6, n_trees=2)
    spec = AcquisitionSpec(np.array([0.3, 0.7]), 1.96, Y.min(axis=0), Y.max(axis=0))
    model = build_acquisition_model(space, ensembles, spec, X, SimilarityTable(space, X, "goodall4"))
    doc = dump_fixture(space, ensembles, spec, X)
    clone = load_fixture(doc)
    vec = np.array([0.3, 1.0])
    assert acquisition_value(clone, vec) == pytest.approx(acquisition_value(model, vec), abs=1e-12)
    assert clone.n_vars == model.n_vars


def test_dump_text_lists_vars_rows_objective():
    space = _line_space()
    ens = _stump_ensemble(space)
    spec = AcquisitionSpec(np.array([1.0]), 1.0, np.zeros(1), np.ones(1))
    model = build_acquisition_model(space, [ens], spec, np.array([[0.5]]))
    text = model.dump_text()
    assert "var 0" in text and "row" in text and "objective: minimize" in text
