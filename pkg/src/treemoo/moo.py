"""Outer multi-objective optimization loop and feasible space-filling sampling.

Each iteration trains one tree ensemble per objective on the data collected
so far, draws random scalarization weights, builds the acquisition model,
solves it globally, and evaluates the black box at the proposal. All
objectives are handled in minimization orientation internally; problems with
maximization objectives negate at this boundary and reports un-negate.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .core import DataSet, DesignSpace, ParetoArchive, Point, is_feasible
from .core.pareto import clipped_hypervolume_2d
from .encode import AcquisitionSpec, PinSpec, build_acquisition_model, build_maxmin_model
from .gbrt import GbrtConfig, train
from .similarity import SimilarityTable
from .solve import SolveConfig, SolveResult, solve


class ProblemInfeasibleError(RuntimeError):
    """Raised when the user constraints admit no solution."""


@dataclass(frozen=True)
class OptimizerConfig:
    """Configuration of one optimization run."""

    budget: int
    n_initial: int
    kappa: float = 1.96
    seed: int = 0
    gbrt: GbrtConfig = field(default_factory=GbrtConfig)
    solve: SolveConfig = field(default_factory=SolveConfig)
    similarity: str = "goodall4"
    y_bounds: tuple | None = None  # optional ((lo, hi), ...) per objective

    def __post_init__(self):
        if not self.budget > self.n_initial >= 1:
            raise ValueError("need budget > n_initial >= 1")
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")


@dataclass
class IterationRecord:
    iteration: int
    phase: str  # "initial" | "proposal"
    point: Point
    y_raw: tuple | None
    y_min: tuple
    weights: tuple | None
    solver_status: str | None
    solver_gap: float | None
    solver_nodes: int | None
    hypervolume: float
    failed: bool = False
    wall_time: float = 0.0  # diagnostics only; excluded from canonical records


@dataclass
class RunRecord:
    problem: str
    optimizer: str
    seed: int
    config: dict
    rows: list[IterationRecord] = field(default_factory=list)


@dataclass
class RunResult:
    record: RunRecord
    archive: ParetoArchive
    dataset: DataSet


def sample_weights(n_f: int, rng: np.random.Generator) -> np.ndarray:
    """Nonnegative weights summing to one: normalized independent uniforms."""
    if n_f < 1:
        raise ValueError("need at least one objective")
    while True:
        w = rng.uniform(0.0, 1.0, size=n_f)
        total = w.sum()
        if total > 0:
            return w / total


def propose(
    space: DesignSpace,
    dataset: DataSet,
    config: OptimizerConfig,
    rng: np.random.Generator,
    aux_completer: Callable[[Point], dict[str, float]] | None = None,
    repair_hook=None,
) -> tuple[Point, dict]:
    """One acquisition solve: train, weight, encode, solve, decode.

    Returns the proposal and solver diagnostics. The proposal is always
    eps-feasible; when the exploration weight is positive an exact duplicate
    of an evaluated point is excluded by re-solving with the duplicate's
    indicator assignment banned.
    """
    if len(dataset) < 1:
        raise ValueError("propose needs at least one observation")
    X = dataset.encoded_matrix()
    Y = dataset.targets
    n_f = dataset.n_objectives
    # tiny early datasets: leaves cannot demand more points than exist
    gbrt_cfg = config.gbrt
    if gbrt_cfg.min_data_per_leaf > len(dataset):
        gbrt_cfg = replace(gbrt_cfg, min_data_per_leaf=len(dataset))
    ensembles = [train(space, X, Y[:, i], gbrt_cfg) for i in range(n_f)]
    weights = sample_weights(n_f, rng)
    if config.y_bounds is not None:
        y_lo = np.array([b[0] for b in config.y_bounds], dtype=float)
        y_hi = np.array([b[1] for b in config.y_bounds], dtype=float)
    else:
        y_lo = Y.min(axis=0)
        y_hi = Y.max(axis=0)
    spec = AcquisitionSpec(weights, config.kappa, y_lo, y_hi)
    table = None
    if space.categorical_indices:
        # Goodall4 needs |D| >= 2 for its frequency estimate
        measure = config.similarity if len(dataset) >= 2 else "overlap"
        table = SimilarityTable(space, X, measure)
    model = build_acquisition_model(space, ensembles, spec, X, table, aux_completer)
    model.repair_hook = repair_hook
    result = solve(model, config.solve)
    if result.status == "infeasible" or result.point is None:
        raise ProblemInfeasibleError("acquisition model infeasible: check user constraints")
    point = result.point
    for _ in range(3):
        if dataset.find_duplicate(point) is None:
            break
        model.banned.append((model.cells_of_point(point), model.labels_of_point(point)))
        result = solve(model, config.solve)
        if result.status == "infeasible" or result.point is None:
            break
        point = result.point
    if dataset.find_duplicate(point) is not None:
        point = _nudge_distinct(space, dataset, point, aux_completer)
    diag = {
        "status": result.status,
        "gap": result.gap,
        "nodes": result.nodes,
        "objective": result.objective,
        "weights": tuple(float(w) for w in weights),
    }
    return point, diag


def _nudge_distinct(space, dataset, point, aux_completer) -> Point:
    """Deterministic last-resort perturbation to the nearest distinct feasible point."""
    for i in space.continuous_indices:
        f = space.features[i]
        for step in (1e-6, 1e-5, 1e-4):
            for direction in (1.0, -1.0):
                values = list(point.values)
                values[i] = min(max(values[i] + direction * step * f.width, f.lower), f.upper)
                cand = Point(tuple(values))
                if aux_completer is not None:
                    cand = Point(cand.values, aux_completer(cand))
                if dataset.find_duplicate(cand) is None and is_feasible(space, cand):
                    return cand
    return point


def run(problem, config: OptimizerConfig, initial_points: list[Point] | None = None) -> RunResult:
    """Full sequential run: initial design plus budgeted proposals.

    ``initial_points`` lets an experiment harness share one initial design
    across competing optimizers; when omitted the problem's own design is
    drawn from the run's seeded generator.
    """
    rng = np.random.default_rng(config.seed)
    space = problem.space
    n_f = problem.n_objectives
    dataset = DataSet(space, n_f)
    archive = ParetoArchive(n_f, problem.ref_point_min)
    record = RunRecord(problem.name, "entmoot", config.seed, _config_echo(config))

    if initial_points is None:
        initials = problem.initial_design(config.n_initial, rng, config.solve)
    else:
        initials = initial_points
    if len(initials) != config.n_initial:
        raise ValueError("initial design size mismatch")
    for it, point in enumerate(initials):
        _observe(problem, record, dataset, archive, point, it, "initial", None, None)
    for it in range(config.n_initial, config.budget):
        t0 = time.perf_counter()
        point, diag = propose(
            space,
            dataset,
            config,
            rng,
            aux_completer=problem.aux_completer,
            repair_hook=problem.repair_hook,
        )
        row = _observe(problem, record, dataset, archive, point, it, "proposal", diag["weights"], diag)
        row.wall_time = time.perf_counter() - t0
    return RunResult(record, archive, dataset)


def _observe(problem, record, dataset, archive, point, iteration, phase, weights, diag):
    failed = False
    y_raw: tuple | None
    try:
        y_raw = tuple(float(v) for v in problem.evaluate(point))
        y_min = problem.orient(y_raw)
    except Exception:
        if len(dataset) == 0:
            raise
        failed = True
        y_raw = None
        y_min = tuple(float(v) for v in dataset.targets.max(axis=0))
    dataset.append(point, y_min)
    archive.insert(point, y_min)
    hv = clipped_hypervolume_2d(archive.front, problem.ref_point_min) if archive.n_objectives == 2 else 0.0
    row = IterationRecord(
        iteration=iteration,
        phase=phase,
        point=point,
        y_raw=y_raw,
        y_min=tuple(float(v) for v in y_min),
        weights=weights,
        solver_status=None if diag is None else diag["status"],
        solver_gap=None if diag is None else diag["gap"],
        solver_nodes=None if diag is None else diag["nodes"],
        hypervolume=hv,
        failed=failed,
    )
    record.rows.append(row)
    return row


def _config_echo(config: OptimizerConfig) -> dict:
    return {
        "budget": config.budget,
        "n_initial": config.n_initial,
        "kappa": config.kappa,
        "seed": config.seed,
        "similarity": config.similarity,
        "y_bounds": config.y_bounds,
        "gbrt": {
            "num_trees": config.gbrt.num_trees,
            "max_depth": config.gbrt.max_depth,
            "min_data_per_leaf": config.gbrt.min_data_per_leaf,
            "learning_rate": config.gbrt.learning_rate,
            "max_bins": config.gbrt.max_bins,
            "seed": config.gbrt.seed,
        },
        "solve": {
            "rel_gap": config.solve.rel_gap,
            "feas_tol": config.solve.feas_tol,
            "time_limit_secs": config.solve.time_limit_secs,
            "node_limit": config.solve.node_limit,
            "seed": config.solve.seed,
        },
    }


# -- feasible space-filling sampling ------------------------------------------


def rejection_sample(
    space: DesignSpace,
    rng: np.random.Generator,
    pinned: dict[int, float] | None = None,
    aux_completer: Callable[[Point], dict[str, float]] | None = None,
    max_tries: int = 10_000,
) -> Point:
    """Uniform feasible draw; pins override the drawn coordinates."""
    pinned = pinned or {}
    for _ in range(max_tries):
        values = []
        for i, f in enumerate(space.features):
            if f.is_continuous:
                values.append(float(rng.uniform(f.lower, f.upper)))
            else:
                values.append(float(rng.integers(0, f.n_labels)))
        for i, v in pinned.items():
            values[i] = float(v)
        point = Point(tuple(values))
        if aux_completer is not None:
            point = Point(point.values, aux_completer(point))
        if is_feasible(space, point):
            return point
    raise ProblemInfeasibleError("rejection sampling found no feasible point")


def maxmin_sample(
    space: DesignSpace,
    existing: Sequence[Point],
    pin: PinSpec | None,
    solve_config: SolveConfig,
    aux_completer: Callable[[Point], dict[str, float]] | None = None,
    repair_hook=None,
) -> Point:
    """One space-filling draw: maximize the distance to the closest sample.

    Distance is normalized Manhattan over continuous features plus overlap
    dissimilarity over categorical ones, encoded with complementary
    positive/negative difference parts and solved by the global solver.
    """
    X = np.vstack([p.as_vector() for p in existing])
    model = build_maxmin_model(space, X, pin, aux_completer)
    model.repair_hook = repair_hook
    result = solve(model, solve_config)
    if result.status == "infeasible" or result.point is None:
        raise ProblemInfeasibleError("max-min sampling model infeasible")
    return result.point


def feasible_maxmin_init(
    space: DesignSpace,
    n_points: int,
    pins: Sequence[PinSpec | None] | None,
    rng: np.random.Generator,
    solve_config: SolveConfig | None = None,
    first_point: Point | None = None,
    aux_completer: Callable[[Point], dict[str, float]] | None = None,
    repair_hook=None,
) -> list[Point]:
    """Feasible space-filling initial design.

    The first point is either supplied, pinned-and-sampled, or drawn
    uniformly; every later point maximizes the Manhattan distance to the
    closest existing point under its pinned assignment. All outputs are
    feasible and pairwise distinct.
    """
    solve_config = solve_config or SolveConfig()
    pins = list(pins) if pins is not None else [None] * n_points
    if len(pins) != n_points:
        raise ValueError("one pin spec (or None) per point required")
    points: list[Point] = []
    for idx in range(n_points):
        try:
            if idx == 0:
                if first_point is not None:
                    point = first_point
                    if aux_completer is not None:
                        point = Point(point.values, aux_completer(point))
                else:
                    pinned = pins[0].features if pins[0] is not None else None
                    point = rejection_sample(space, rng, pinned, aux_completer)
            else:
                point = maxmin_sample(
                    space, points, pins[idx], solve_config, aux_completer, repair_hook
                )
        except ProblemInfeasibleError as err:
            raise ProblemInfeasibleError(f"initial point {idx}: {err}") from err
        if not is_feasible(space, point):
            raise ProblemInfeasibleError(f"initial point {idx} is infeasible")
        if any(np.array_equal(point.as_vector(), p.as_vector()) for p in points):
            raise ProblemInfeasibleError(f"initial point {idx} duplicates an earlier point")
        points.append(point)
    return points
