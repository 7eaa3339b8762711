"""Benchmark tests: synthetic functions, windfarm model, battery fixture."""

import math

import numpy as np
import pytest

from treemoo.bench import get_problem, available_problems
from treemoo.bench.battery import battery_aux, battery_design_space, battery_stub_evaluate
from treemoo.bench.synthetic import SYNTHETIC_PROBLEMS, true_front
from treemoo.bench.windfarm import (
    FIELD_SIDE,
    Layout,
    MAX_TURBINES,
    MIN_DISTANCE,
    default_model,
    eval_windfarm,
    first_point,
    layout_aux,
    lens_area,
    load_curves,
    load_rose,
    pairwise_violations,
    repair_layout,
    wake_interference,
    windfarm_design_space,
    write_default_files,
)
from treemoo.core import Point, is_feasible, violations


class TestSynthetic:
    def test_fonseca_analytic_point(self):
        p = SYNTHETIC_PROBLEMS["fonseca_fleming"]
        f1, f2 = p.evaluate(np.array([1 / math.sqrt(2), 1 / math.sqrt(2)]))
        assert f1 == pytest.approx(0.0, abs=1e-12)
        assert f2 == pytest.approx(1 - math.exp(-4.0), abs=1e-12)

    def test_schaffer_point(self):
        assert SYNTHETIC_PROBLEMS["schaffer"].evaluate(np.array([2.0])) == (4.0, 0.0)

    def test_s_plus_origin(self):
        f1, f2 = SYNTHETIC_PROBLEMS["s_plus"].evaluate(np.array([0.0, 0.0]))
        assert (f1, f2) == (0.0, 10.0)

    def test_kursawe_negative_inputs_defined(self):
        f1, f2 = SYNTHETIC_PROBLEMS["kursawe"].evaluate(np.array([-1.0, -2.0, -3.0]))
        assert math.isfinite(f1) and math.isfinite(f2)

    def test_out_of_bounds_rejected(self):
        with pytest.raises(ValueError):
            SYNTHETIC_PROBLEMS["schaffer"].evaluate(np.array([3.5]))

    @pytest.mark.parametrize("name", ("fonseca_fleming", "schaffer"))
    def test_exact_output_bounds_on_random_samples(self, name):
        p = SYNTHETIC_PROBLEMS[name]
        rng = np.random.default_rng(0)
        X = np.column_stack(
            [rng.uniform(lo, hi, 100_000) for lo, hi in p.bounds]
        )
        from treemoo.bench.synthetic import _vector_eval

        F = _vector_eval(name, X)
        (lo1, hi1), (lo2, hi2) = p.output_bounds
        assert F[:, 0].min() >= lo1 - 1e-9 and F[:, 0].max() <= hi1 + 1e-9
        assert F[:, 1].min() >= lo2 - 1e-9 and F[:, 1].max() <= hi2 + 1e-9

    @pytest.mark.parametrize("name", ("kursawe", "s_plus", "s_minus"))
    def test_soft_bounds_cover_the_front(self, name):
        # the stated output ranges are approximate; they must cover the
        # Pareto-relevant region used for reference points
        p = SYNTHETIC_PROBLEMS[name]
        front = true_front(name, 50_000)
        (lo1, hi1), (lo2, hi2) = p.output_bounds
        span1, span2 = hi1 - lo1, hi2 - lo2
        assert front[:, 0].min() >= lo1 - 0.05 * span1
        assert front[:, 0].max() <= hi1 + 0.05 * span1
        assert front[:, 1].min() >= lo2 - 0.05 * span2
        assert front[:, 1].max() <= hi2 + 0.05 * span2

    def test_true_front_endpoints(self):
        front = true_front("schaffer", 100_000)
        d0 = np.min(np.linalg.norm(front - np.array([0.0, 4.0]), axis=1))
        d2 = np.min(np.linalg.norm(front - np.array([4.0, 0.0]), axis=1))
        assert d0 < 1e-3 and d2 < 1e-3

    def test_fonseca_front_contains_extreme(self):
        front = true_front("fonseca_fleming", 250_000)
        target = np.array([0.0, 1 - math.exp(-4.0)])
        assert np.min(np.linalg.norm(front - target, axis=1)) < 1e-3

    def test_zero_samples_error(self):
        with pytest.raises(ValueError):
            true_front("schaffer", 0)


def _single_turbine_layout(x=2000.0, y=2000.0):
    active = np.zeros(MAX_TURBINES, dtype=bool)
    active[0] = True
    xs = np.zeros(MAX_TURBINES)
    ys = np.zeros(MAX_TURBINES)
    xs[0], ys[0] = x, y
    return Layout(active, xs, ys)


class TestWindfarm:
    def test_single_turbine_exact_values(self):
        f1, f2 = eval_windfarm(_single_turbine_layout())
        assert f2 == pytest.approx(1.0, abs=1e-12)
        assert f1 == pytest.approx(1.0 / 16.0, abs=1e-12)

    def test_distant_crosswind_pair_efficiency_one(self):
        # maximum wake reach at the largest distance is far below 5000 m apart
        layout = _single_turbine_layout()
        layout.active[1] = True
        layout.xs[1], layout.ys[1] = layout.xs[0] + 3500.0, layout.ys[0] - 3500.0
        _, f2 = eval_windfarm(layout)
        assert f2 > 0.99

    def test_upwind_no_interference(self):
        model = default_model()
        # wind blowing along +x: upwind neighbor suffers nothing
        u = wake_interference(model, np.array([1000.0, 0.0]), np.array([0.0, 0.0]), 9.0, 0.0)
        assert u == 0.0
        d = wake_interference(model, np.array([0.0, 0.0]), np.array([1000.0, 0.0]), 9.0, 0.0)
        assert d > 0.0

    def test_full_coverage_area(self):
        assert lens_area(200.0, 82.0, 10.0) == pytest.approx(math.pi * 82.0**2)

    def test_disjoint_circles_zero(self):
        assert lens_area(100.0, 82.0, 200.0) == 0.0

    def test_lens_between(self):
        area = lens_area(100.0, 82.0, 100.0)
        assert 0.0 < area < math.pi * 82.0**2

    def test_efficiency_identity_on_random_layouts(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = int(rng.integers(1, 9))
            layout = Layout(np.zeros(MAX_TURBINES, dtype=bool), np.zeros(MAX_TURBINES), np.zeros(MAX_TURBINES))
            # rejection-free construction: jittered grid is always separated
            grid = np.linspace(200.0, FIELD_SIDE - 200.0, 4)
            slots = rng.permutation(16)[:n]
            for k, slot in enumerate(slots):
                layout.active[k] = True
                layout.xs[k] = grid[slot % 4] + rng.uniform(-80, 80)
                layout.ys[k] = grid[slot // 4] + rng.uniform(-80, 80)
            f1, f2 = eval_windfarm(layout)
            assert 0.0 < f2 <= 1.0 + 1e-12
            assert f1 == pytest.approx(layout.n_active / 16.0 * f2, abs=1e-12)

    def test_rotation_invariance(self):
        model = default_model()
        layout = _single_turbine_layout(1000.0, 1500.0)
        layout.active[1] = True
        layout.xs[1], layout.ys[1] = 2100.0, 2600.0
        base = eval_windfarm(layout, model)
        angle = 90.0
        t = math.radians(angle)
        c0 = np.array([FIELD_SIDE / 2, FIELD_SIDE / 2])
        rot = Layout(layout.active.copy(), layout.xs.copy(), layout.ys.copy())
        for k in range(MAX_TURBINES):
            v = np.array([layout.xs[k], layout.ys[k]]) - c0
            rot.xs[k] = c0[0] + v[0] * math.cos(t) - v[1] * math.sin(t)
            rot.ys[k] = c0[1] + v[0] * math.sin(t) + v[1] * math.cos(t)
        rose = model.rose.copy()
        rose[:, 1] = (rose[:, 1] + angle) % 360.0
        from treemoo.bench.windfarm import WindfarmModel

        rotated_model = WindfarmModel(rose, model.power, model.thrust)
        got = eval_windfarm(rot, rotated_model)
        assert got[0] == pytest.approx(base[0], abs=1e-9)
        assert got[1] == pytest.approx(base[1], abs=1e-9)

    def test_zero_active_is_error(self):
        layout = Layout(np.zeros(MAX_TURBINES, dtype=bool), np.zeros(MAX_TURBINES), np.zeros(MAX_TURBINES))
        with pytest.raises(ValueError):
            eval_windfarm(layout)

    def test_constraints_close_pair_infeasible(self):
        space = windfarm_design_space(include_helpers=False)
        layout = _single_turbine_layout(1000.0, 1000.0)
        layout.active[1] = True
        layout.xs[1], layout.ys[1] = 1900.0, 1000.0  # 900 m apart
        point = layout.to_point()
        assert not is_feasible(space, point)
        layout.xs[1] = 1000.0 + MIN_DISTANCE + 1.0
        assert is_feasible(space, layout.to_point())

    def test_single_turbine_feasible(self):
        space = windfarm_design_space(include_helpers=True)
        assert is_feasible(space, _single_turbine_layout(0.0, 0.0).to_point())

    def test_helper_ordering_violation(self):
        space = windfarm_design_space(include_helpers=True)
        layout = Layout(np.zeros(MAX_TURBINES, dtype=bool), np.zeros(MAX_TURBINES), np.zeros(MAX_TURBINES))
        layout.active[0], layout.active[2] = True, True  # gap at b2
        layout.xs[2], layout.ys[2] = 2000.0, 2000.0
        point = layout.to_point()
        assert not is_feasible(space, point)
        names = [n for n, _ in violations(space, point)]
        assert any(n.startswith("order") for n in names)

    def test_repair_layout_always_separates(self):
        rng = np.random.default_rng(2)
        for n in (2, 8, 16):
            labels = np.zeros(MAX_TURBINES)
            labels[:n] = 1.0
            x = rng.uniform(0, FIELD_SIDE, 2 * MAX_TURBINES)
            got = repair_layout(x, labels, np.zeros(32), np.full(32, FIELD_SIDE))
            assert got is not None
            coords, _ = got
            layout = Layout(labels > 0.5, coords[:MAX_TURBINES], coords[MAX_TURBINES:])
            assert not pairwise_violations(layout.to_point())

    def test_first_point_matches_seed_construction(self):
        rng = np.random.default_rng(5)
        p = first_point(rng)
        layout = Layout.from_point(p)
        assert layout.n_active == 1 and layout.active[0]
        assert FIELD_SIDE / 2 <= layout.xs[0] <= FIELD_SIDE
        assert layout.xs[0] == layout.ys[0]

    def test_rose_and_curve_files_round_trip(self, tmp_path):
        rose_path = tmp_path / "rose.txt"
        curve_path = tmp_path / "curves.txt"
        write_default_files(rose_path, curve_path)
        rose = load_rose(rose_path)
        assert rose.shape[1] == 3 and abs(rose[:, 2].sum() - 1.0) < 1e-9
        power, thrust = load_curves(curve_path)
        assert power(9.0) > 0 and 0 < thrust(9.0) <= 1.0
        assert power(30.0) == 0.0  # beyond cut-out


class TestBattery:
    def test_space_shape(self):
        space = battery_design_space()
        assert len(space.categorical_indices) == 1
        assert len(space.continuous_indices) == 9

    def test_c_rate_cap_indicator(self):
        space = battery_design_space()
        base = [0.0, 3.0, 0.3, 0.3, 5e-6, 0.3, 0.3, 5e-6, 1.0, 1.0]
        point = Point(tuple(base))
        point = Point(point.values, battery_aux(point))
        assert is_feasible(space, point)  # Ai2019 cap 3.2
        hot = list(base)
        hot[1] = 4.0
        p2 = Point(tuple(hot))
        p2 = Point(p2.values, battery_aux(p2))
        assert not is_feasible(space, p2)
        hot[0] = 2.0  # Ecker2015 cap 8.2
        p3 = Point(tuple(hot))
        p3 = Point(p3.values, battery_aux(p3))
        assert is_feasible(space, p3)

    def test_binder_constraint(self):
        space = battery_design_space()
        bad = [0.0, 1.0, 0.6, 0.6, 5e-6, 0.3, 0.3, 5e-6, 1.0, 1.0]
        p = Point(tuple(bad))
        p = Point(p.values, battery_aux(p))
        assert not is_feasible(space, p)

    def test_stub_evaluator_deterministic(self):
        p = Point((1.0, 2.0, 0.4, 0.4, 3e-6, 0.4, 0.4, 3e-6, 1.5, 0.7))
        assert battery_stub_evaluate(p) == battery_stub_evaluate(p)


def test_problem_registry():
    assert set(available_problems()) == {
        "battery_fixture",
        "fonseca_fleming",
        "kursawe",
        "s_minus",
        "s_plus",
        "schaffer",
        "windfarm",
    }
    with pytest.raises(KeyError):
        get_problem("nope")
    problem = get_problem("windfarm")
    assert problem.senses == ("max", "max")
    assert problem.orient((0.5, 1.0)) == (-0.5, -1.0)
    assert problem.unorient((-0.5, -1.0)) == (0.5, 1.0)
