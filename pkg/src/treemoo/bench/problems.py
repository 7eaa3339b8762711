"""Problem registry: benchmark definitions consumable by every optimizer.

A Problem bundles the design space (optionally a relaxed variant without
symmetry-breaking helpers for optimizers that cannot exploit them), the raw
evaluator with its objective senses, reference points, auxiliary completion,
and the problem-specific initial design.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..core import AuxTerm, DesignSpace, Linear, Point
from ..encode import PinSpec
from ..moo import feasible_maxmin_init, rejection_sample
from ..solve import SolveConfig
from . import battery, synthetic, windfarm


@dataclass
class Problem:
    name: str
    space: DesignSpace
    n_objectives: int
    senses: tuple[str, ...]
    evaluate: Callable[[Point], tuple]
    ref_point_min: np.ndarray
    nsga_space: DesignSpace | None = None
    aux_completer: Callable[[Point], dict[str, float]] | None = None
    repair_hook: Callable | None = None
    _initial: Callable | None = None
    _pins: Callable[[int], PinSpec | None] | None = None
    true_front: Callable[[int], np.ndarray] | None = None

    def orient(self, y_raw) -> tuple:
        """Map raw objective values into minimization orientation."""
        return tuple(
            -float(v) if s == "max" else float(v) for v, s in zip(y_raw, self.senses)
        )

    def unorient(self, y_min) -> tuple:
        return tuple(
            -float(v) if s == "max" else float(v) for v, s in zip(y_min, self.senses)
        )

    def initial_design(self, n: int, rng: np.random.Generator, solve_config: SolveConfig) -> list[Point]:
        if self._initial is None:
            return [rejection_sample(self.space, rng, None, self.aux_completer) for _ in range(n)]
        return self._initial(self, n, rng, solve_config)

    def maxmin_pins(self, sample_index: int) -> PinSpec | None:
        """Rotating pinned assignment for continued space-filling draws."""
        if self._pins is None:
            return None
        return self._pins(sample_index)

    @property
    def constraint_space(self) -> DesignSpace:
        """Space whose rows define feasibility for reporting (no helpers)."""
        return self.nsga_space if self.nsga_space is not None else self.space


def _synthetic_problem(name: str) -> Problem:
    sp = synthetic.SYNTHETIC_PROBLEMS[name]
    ref = np.array(sp.reference_point)

    def evaluate(point: Point) -> tuple:
        return sp.evaluate(point.as_vector())

    return Problem(
        name=name,
        space=sp.space(),
        n_objectives=2,
        senses=("min", "min"),
        evaluate=evaluate,
        ref_point_min=ref,
        true_front=lambda n=200_000: synthetic.true_front(name, n),
    )


def _windfarm_turbine_pin(n_turb: int) -> PinSpec:
    row = Linear(
        tuple(AuxTerm(f"act{k + 1}", 1.0) for k in range(windfarm.MAX_TURBINES)),
        "==",
        float(n_turb),
        name=f"nturb{n_turb}",
    )
    return PinSpec(rows=(row,))


def _windfarm_initial(problem: Problem, n: int, rng: np.random.Generator,
                      solve_config: SolveConfig) -> list[Point]:
    """Space-filling layouts with 1, 2, ..., n active turbines."""
    pins: list[PinSpec | None] = [None]
    for idx in range(1, n):
        pins.append(_windfarm_turbine_pin(min(idx + 1, windfarm.MAX_TURBINES)))
    first = windfarm.first_point(rng)
    return feasible_maxmin_init(
        problem.space,
        n,
        pins,
        rng,
        solve_config,
        first_point=first,
        aux_completer=problem.aux_completer,
        repair_hook=problem.repair_hook,
    )


def _windfarm_problem(model: windfarm.WindfarmModel | None = None) -> Problem:
    model = model or windfarm.default_model()

    def evaluate(point: Point) -> tuple:
        return windfarm.eval_windfarm(windfarm.Layout.from_point(point), model)

    problem = Problem(
        name="windfarm",
        space=windfarm.windfarm_design_space(include_helpers=True),
        n_objectives=2,
        senses=("max", "max"),
        evaluate=evaluate,
        ref_point_min=np.zeros(2),  # negated objectives live in [-1, 0)
        nsga_space=windfarm.windfarm_design_space(include_helpers=False),
        aux_completer=windfarm.layout_aux,
        repair_hook=windfarm.repair_layout,
        _initial=_windfarm_initial,
        _pins=lambda idx: _windfarm_turbine_pin((idx % windfarm.MAX_TURBINES) + 1),
    )
    return problem


def _battery_initial(problem: Problem, n: int, rng: np.random.Generator,
                     solve_config: SolveConfig) -> list[Point]:
    """Feasible draws cycling the parameter-set label (two per set for n=10)."""
    k = len(battery.PARAMETER_SETS)
    pins: list[PinSpec | None] = [PinSpec(features={battery.F_P: float(i % k)}) for i in range(n)]
    first = rejection_sample(problem.space, rng, pins[0].features, problem.aux_completer)
    return feasible_maxmin_init(
        problem.space,
        n,
        pins,
        rng,
        solve_config,
        first_point=first,
        aux_completer=problem.aux_completer,
    )


def _battery_problem() -> Problem:
    return Problem(
        name="battery_fixture",
        space=battery.battery_design_space(),
        n_objectives=2,
        senses=("max", "max"),
        evaluate=battery.battery_stub_evaluate,
        ref_point_min=np.zeros(2),
        aux_completer=battery.battery_aux,
        _initial=_battery_initial,
        _pins=lambda idx: PinSpec(
            features={battery.F_P: float(idx % len(battery.PARAMETER_SETS))}
        ),
    )


def get_problem(name: str) -> Problem:
    if name in synthetic.SYNTHETIC_PROBLEMS:
        return _synthetic_problem(name)
    if name == "windfarm":
        return _windfarm_problem()
    if name == "battery_fixture":
        return _battery_problem()
    raise KeyError(
        f"unknown problem {name!r}; available: {', '.join(available_problems())}"
    )


def available_problems() -> list[str]:
    return sorted(list(synthetic.SYNTHETIC_PROBLEMS) + ["windfarm", "battery_fixture"])
