"""Solver tests: fixtures vs. the brute-force oracle, bounds, certificates."""

import io

import numpy as np
import pytest

from treemoo.core import ContinuousFeature, ContTerm, DesignSpace, Linear, Point
from treemoo.encode import (
    AcquisitionSpec,
    acquisition_value,
    build_acquisition_model,
    build_maxmin_model,
    complete_solution,
    check_solution,
)
from treemoo.gbrt import Leaf, SplitNode, Tree, TreeEnsemble
from treemoo.moo import sample_weights
from treemoo.similarity import SimilarityTable
from treemoo.solve import SolveConfig, bound_cell, solve

from oracles import acquisition_oracle, random_fixture

EXACT = SolveConfig(rel_gap=1e-9, time_limit_secs=float("inf"))


def _line_space(constraints=()):
    return DesignSpace((ContinuousFeature("x", 0.0, 1.0),), tuple(constraints))


def _stump_model(kappa=0.0, weights=(1.0,)):
    space = _line_space()
    ens = TreeEnsemble(
        space, [Tree([SplitNode(0, 0.5, None, 1, 2), Leaf(1.0), Leaf(2.0)])], 0.0
    )
    spec = AcquisitionSpec(np.array(weights), kappa, np.zeros(1), np.ones(1))
    return build_acquisition_model(space, [ens], spec, np.array([[0.9]]))


def test_single_tree_optimum():
    model = _stump_model()
    res = solve(model, EXACT)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(1.0)  # normalized left-leaf value
    assert 0.0 <= res.point.values[0] <= 0.5


def test_contradictory_rows_infeasible():
    space = _line_space(
        [
            Linear((ContTerm(0, 1.0),), "<=", 0.0, name="le0"),
            Linear((ContTerm(0, 1.0),), ">=", 1.0, name="ge1"),
        ]
    )
    ens = TreeEnsemble(space, [Tree([Leaf(1.0)])], 0.0)
    spec = AcquisitionSpec(np.array([1.0]), 0.0, np.zeros(1), np.ones(1))
    model = build_acquisition_model(space, [ens], spec, np.array([[0.5]]))
    res = solve(model, EXACT)
    assert res.status == "infeasible"
    assert res.point is None


@pytest.mark.parametrize("trial", range(6))
def test_oracle_equivalence(trial):
    rng = np.random.default_rng(40 + trial)
    space, ensembles, X, Y = random_fixture(
        rng, n_cont=2, n_cat=1, n_labels=3, n_data=8, n_trees=3
    )
    w = sample_weights(2, rng)
    kappa = 1.96 if trial % 2 else 0.0
    y_lo, y_hi = Y.min(axis=0), Y.max(axis=0)
    oracle_val, _ = acquisition_oracle(space, ensembles, w, kappa, y_lo, y_hi, X)
    model = build_acquisition_model(
        space,
        ensembles,
        AcquisitionSpec(w, kappa, y_lo, y_hi),
        X,
        SimilarityTable(space, X, "goodall4"),
    )
    res = solve(model, EXACT)
    assert res.objective == pytest.approx(oracle_val, abs=1e-6)


def test_certificate_validity():
    rng = np.random.default_rng(50)
    space, ensembles, X, Y = random_fixture(rng, n_cont=2, n_cat=1, n_data=8, n_trees=4)
    w = sample_weights(2, rng)
    model = build_acquisition_model(
        space,
        ensembles,
        AcquisitionSpec(w, 1.96, Y.min(axis=0), Y.max(axis=0)),
        X,
        SimilarityTable(space, X, "goodall4"),
    )
    config = SolveConfig(rel_gap=1e-6, time_limit_secs=float("inf"))
    res = solve(model, config)
    assert res.status == "optimal"
    direct = acquisition_value(model, res.point.as_vector())
    assert abs(direct - res.objective) <= 1e-6 + config.rel_gap * abs(res.objective)
    # the returned assignment satisfies every encoded row
    assert not check_solution(model, res.solution)


def test_root_bound_below_feasible_samples():
    rng = np.random.default_rng(60)
    space, ensembles, X, Y = random_fixture(rng, n_cont=2, n_cat=1, n_data=6, n_trees=3)
    w = sample_weights(2, rng)
    model = build_acquisition_model(
        space,
        ensembles,
        AcquisitionSpec(w, 1.96, Y.min(axis=0), Y.max(axis=0)),
        X,
        SimilarityTable(space, X, "goodall4"),
    )
    root = bound_cell(model)
    for _ in range(100):
        vec = np.array([rng.uniform(0, 1), rng.uniform(0, 1), rng.integers(0, 3)])
        assert root <= acquisition_value(model, vec) + 1e-9


def test_bound_cell_fixed_assignment_is_tight():
    model = _stump_model()
    # cell 0 of the only feature: mu is exact and alpha ignored (kappa = 0)
    assert bound_cell(model, cells={0: (0, 0)}) == pytest.approx(1.0)
    assert bound_cell(model, cells={0: (1, 1)}) == pytest.approx(2.0)


def test_monotone_global_bound_log():
    rng = np.random.default_rng(70)
    space, ensembles, X, Y = random_fixture(rng, n_cont=2, n_cat=1, n_data=8, n_trees=4)
    w = sample_weights(2, rng)
    model = build_acquisition_model(
        space,
        ensembles,
        AcquisitionSpec(w, 1.96, Y.min(axis=0), Y.max(axis=0)),
        X,
        SimilarityTable(space, X, "goodall4"),
    )
    log = io.StringIO()
    solve(model, EXACT, node_log=log)
    bounds = [float(line.split()[5]) for line in log.getvalue().splitlines()]
    assert len(bounds) > 1
    assert all(b2 >= b1 - 1e-9 for b1, b2 in zip(bounds, bounds[1:]))


def test_determinism_same_model_same_result():
    rng = np.random.default_rng(80)
    space, ensembles, X, Y = random_fixture(rng, n_cont=2, n_cat=1, n_data=8, n_trees=3)
    w = sample_weights(2, rng)

    def once():
        model = build_acquisition_model(
            space,
            ensembles,
            AcquisitionSpec(w, 1.96, Y.min(axis=0), Y.max(axis=0)),
            X,
            SimilarityTable(space, X, "goodall4"),
        )
        return solve(model, EXACT)

    r1, r2 = once(), once()
    assert r1.objective == r2.objective
    assert r1.nodes == r2.nodes
    assert r1.point.values == r2.point.values


def test_node_limit_gives_gap_limit_status():
    rng = np.random.default_rng(90)
    space, ensembles, X, Y = random_fixture(rng, n_cont=2, n_cat=1, n_data=10, n_trees=5)
    w = sample_weights(2, rng)
    model = build_acquisition_model(
        space,
        ensembles,
        AcquisitionSpec(w, 1.96, Y.min(axis=0), Y.max(axis=0)),
        X,
        SimilarityTable(space, X, "goodall4"),
    )
    res = solve(model, SolveConfig(rel_gap=1e-12, node_limit=3, time_limit_secs=float("inf")))
    assert res.status in ("gap_limit", "optimal")
    assert res.bound <= res.objective + 1e-12


def test_maxmin_model_solved_exactly():
    # data {0.25}: the farthest point in [0, 1] is 1.0 at Manhattan distance 0.75
    space = _line_space()
    model = build_maxmin_model(space, np.array([[0.25]]))
    res = solve(model, EXACT)
    assert res.objective == pytest.approx(-0.75, abs=1e-9)
    assert res.point.values[0] == pytest.approx(1.0, abs=1e-6)


def test_solve_result_invariant():
    from treemoo.solve import SolveResult

    with pytest.raises(ValueError):
        SolveResult(Point((0.0,)), objective=1.0, bound=2.0, gap=0.0, status="optimal",
                    nodes=1, wall_time=0.0)
