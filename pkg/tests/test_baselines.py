"""Baseline optimizer tests: NSGA-II machinery and the feasible sampler."""

import numpy as np
import pytest

from treemoo.baselines import (
    NsgaConfig,
    _Genome,
    crowding_distance,
    fast_nondominated_sort,
    nsga2_run,
    random_feasible_run,
)
from treemoo.bench import get_problem
from treemoo.core import ContinuousFeature, DesignSpace, Point
from treemoo.solve import SolveConfig


class _LineProblem:
    """Schaffer-style toy with both objectives equal (degenerate single objective)."""

    name = "line"
    n_objectives = 2
    senses = ("min", "min")
    aux_completer = None
    repair_hook = None

    def __init__(self, duplicate=False):
        self.space = DesignSpace((ContinuousFeature("x", -3.0, 3.0),))
        self.nsga_space = None
        self.ref_point_min = np.array([30.0, 30.0])
        self.duplicate = duplicate

    @property
    def constraint_space(self):
        return self.space

    def evaluate(self, point):
        x = point.values[0]
        if self.duplicate:
            return (x * x, x * x)
        return (x * x, (x - 2.0) ** 2)

    def orient(self, y_raw):
        return tuple(float(v) for v in y_raw)

    def unorient(self, y_min):
        return tuple(float(v) for v in y_min)

    def initial_design(self, n, rng, solve_config):
        return [Point((float(v),)) for v in np.linspace(-3, 3, n)]

    def maxmin_pins(self, idx):
        return None


class TestGenome:
    def test_one_hot_decode_argmax(self):
        from treemoo.core import CategoricalFeature

        space = DesignSpace((CategoricalFeature("c", ("a", "b", "z")),))
        genome = _Genome(space)
        point = genome.decode(np.array([0.2, 0.9, 0.4]))
        assert point.values == (1.0,)

    def test_encode_round_trip(self):
        from treemoo.core import CategoricalFeature

        space = DesignSpace(
            (ContinuousFeature("x", 0.0, 2.0), CategoricalFeature("c", ("a", "b")))
        )
        genome = _Genome(space)
        p = Point((1.5, 1))
        assert genome.decode(genome.encode(p)).values == p.values


class TestSorting:
    def test_fast_nondominated_sort(self):
        F = np.array([[0.0, 2.0], [2.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        fronts = fast_nondominated_sort(F)
        assert sorted(fronts[0]) == [0, 1, 2]
        assert sorted(fronts[1]) == [3]
        assert sorted(fronts[2]) == [4]

    def test_crowding_extremes_infinite(self):
        F = np.array([[0.0, 3.0], [1.0, 1.0], [3.0, 0.0]])
        d = crowding_distance(F)
        assert np.isinf(d[0]) and np.isinf(d[2])
        assert np.isfinite(d[1])


class TestNsga2:
    def test_budget_equal_population_evaluates_initials_only(self):
        problem = _LineProblem()
        init = problem.initial_design(6, None, None)
        result = nsga2_run(problem, 6, init, NsgaConfig(population=6, seed=0))
        assert len(result.record.rows) == 6
        assert all(r.phase == "initial" for r in result.record.rows)

    def test_budget_respected_and_initials_bit_exact(self):
        problem = _LineProblem()
        init = problem.initial_design(6, None, None)
        result = nsga2_run(problem, 30, init, NsgaConfig(population=6, seed=1))
        assert len(result.record.rows) == 30
        for row, p in zip(result.record.rows[:6], init):
            assert row.point.values == p.values

    def test_degenerate_single_objective_converges(self):
        bests = []
        for seed in range(5):
            problem = _LineProblem(duplicate=True)
            init = problem.initial_design(10, None, None)
            result = nsga2_run(problem, 80, init, NsgaConfig(population=10, seed=seed))
            bests.append(min(r.y_min[0] for r in result.record.rows))
        assert np.median(bests) < 0.5

    def test_constraint_domination(self):
        # an infeasible windfarm pair must lose the tournament to any feasible one
        from treemoo.baselines import nsga2_run as _run  # noqa: F401
        from treemoo.core import total_violation
        from treemoo.bench.windfarm import Layout, MAX_TURBINES, windfarm_design_space

        space = windfarm_design_space(include_helpers=False)
        bad = Layout(
            np.array([True, True] + [False] * 14),
            np.array([0.0, 100.0] + [0.0] * 14),
            np.zeros(MAX_TURBINES),
        )
        good = Layout(
            np.array([True, True] + [False] * 14),
            np.array([0.0, 2000.0] + [0.0] * 14),
            np.zeros(MAX_TURBINES),
        )
        assert total_violation(space, bad.to_point()) > 0
        assert total_violation(space, good.to_point()) == 0

    def test_elitism_archive_never_regresses(self):
        problem = _LineProblem()
        init = problem.initial_design(6, None, None)
        result = nsga2_run(problem, 40, init, NsgaConfig(population=6, seed=3))
        hv = [r.hypervolume for r in result.record.rows]
        assert all(b >= a - 1e-12 for a, b in zip(hv, hv[1:]))

    def test_population_must_be_even(self):
        with pytest.raises(ValueError):
            NsgaConfig(population=5)


class TestRandomFeasible:
    def test_unconstrained_spread_in_bounds(self):
        problem = _LineProblem()
        init = problem.initial_design(4, None, None)
        result = random_feasible_run(
            problem, 12, init, SolveConfig(rel_gap=1e-6, time_limit_secs=float("inf")), seed=0
        )
        xs = [r.point.values[0] for r in result.record.rows]
        assert len(xs) == 12
        assert all(-3.0 - 1e-9 <= x <= 3.0 + 1e-9 for x in xs)
        assert len(set(xs)) == 12  # all distinct draws
        hv = [r.hypervolume for r in result.record.rows]
        assert all(b >= a - 1e-12 for a, b in zip(hv, hv[1:]))

    def test_windfarm_pins_cycle(self):
        problem = get_problem("windfarm")
        pins = [problem.maxmin_pins(i) for i in range(34)]
        counts = [p.rows[0].rhs for p in pins]
        assert counts[:16] == [float(k) for k in range(1, 17)]
        assert counts[16:32] == counts[:16]
