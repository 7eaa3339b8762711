"""Comparison optimizers: NSGA-II and feasible random (space-filling) search.

NSGA-II follows the standard generational template: fast non-dominated
sorting, crowding distance, binary tournament under constraint domination,
simulated-binary crossover, and polynomial mutation. All genes are
continuous: categorical features evolve as one-hot blocks in [0, 1] decoded
by the largest entry, so the genome never needs repair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DataSet, ParetoArchive, Point, total_violation
from .core.pareto import clipped_hypervolume_2d
from .moo import IterationRecord, RunRecord, RunResult, maxmin_sample
from .solve import SolveConfig


@dataclass(frozen=True)
class NsgaConfig:
    """Operator constants; the stand-in for common library defaults."""

    population: int = 10
    crossover_prob: float = 0.9
    crossover_eta: float = 15.0
    mutation_prob: float | None = None  # default 1/n_genes
    mutation_eta: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if self.population < 2 or self.population % 2:
            raise ValueError("population must be even and >= 2")


class _Genome:
    """Flat continuous genome over a design space with one-hot categoricals."""

    def __init__(self, space):
        self.space = space
        lo, hi, self.slices = [], [], []
        pos = 0
        for f in space.features:
            if f.is_continuous:
                lo.append(f.lower)
                hi.append(f.upper)
                self.slices.append(("cont", pos, pos + 1))
                pos += 1
            else:
                k = f.n_labels
                lo += [0.0] * k
                hi += [1.0] * k
                self.slices.append(("cat", pos, pos + k))
                pos += k
        self.lo = np.array(lo)
        self.hi = np.array(hi)
        self.n_genes = pos

    def decode(self, genes: np.ndarray) -> Point:
        values = []
        for kind, a, b in self.slices:
            if kind == "cont":
                values.append(float(genes[a]))
            else:
                values.append(float(np.argmax(genes[a:b])))
        return Point(tuple(values))

    def encode(self, point: Point) -> np.ndarray:
        genes = np.zeros(self.n_genes)
        for (kind, a, b), v in zip(self.slices, point.values):
            if kind == "cont":
                genes[a] = v
            else:
                genes[a + int(v)] = 1.0
        return genes


def _sbx(p1, p2, lo, hi, eta, prob, rng):
    c1, c2 = p1.copy(), p2.copy()
    if rng.uniform() > prob:
        return c1, c2
    for i in range(len(p1)):
        if rng.uniform() > 0.5 or abs(p1[i] - p2[i]) < 1e-14:
            continue
        y1, y2 = min(p1[i], p2[i]), max(p1[i], p2[i])
        u = rng.uniform()
        beta = 1.0 + 2.0 * (y1 - lo[i]) / (y2 - y1)
        alpha = 2.0 - beta ** -(eta + 1.0)
        betaq = (
            (u * alpha) ** (1.0 / (eta + 1.0))
            if u <= 1.0 / alpha
            else (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))
        )
        ch1 = 0.5 * ((y1 + y2) - betaq * (y2 - y1))
        beta = 1.0 + 2.0 * (hi[i] - y2) / (y2 - y1)
        alpha = 2.0 - beta ** -(eta + 1.0)
        betaq = (
            (u * alpha) ** (1.0 / (eta + 1.0))
            if u <= 1.0 / alpha
            else (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))
        )
        ch2 = 0.5 * ((y1 + y2) + betaq * (y2 - y1))
        if rng.uniform() < 0.5:
            ch1, ch2 = ch2, ch1
        c1[i] = min(max(ch1, lo[i]), hi[i])
        c2[i] = min(max(ch2, lo[i]), hi[i])
    return c1, c2


def _polynomial_mutation(genes, lo, hi, eta, prob, rng):
    out = genes.copy()
    for i in range(len(genes)):
        if rng.uniform() > prob:
            continue
        span = hi[i] - lo[i]
        if span <= 0:
            continue
        u = rng.uniform()
        d1 = (out[i] - lo[i]) / span
        d2 = (hi[i] - out[i]) / span
        if u < 0.5:
            delta = (2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)) ** (
                1.0 / (eta + 1.0)
            ) - 1.0
        else:
            delta = 1.0 - (
                2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)
            ) ** (1.0 / (eta + 1.0))
        out[i] = min(max(out[i] + delta * span, lo[i]), hi[i])
    return out


def fast_nondominated_sort(F: np.ndarray) -> list[list[int]]:
    n = len(F)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    dom_count = np.zeros(n, dtype=int)
    for a in range(n):
        for b in range(a + 1, n):
            a_le_b = np.all(F[a] <= F[b]) and np.any(F[a] < F[b])
            b_le_a = np.all(F[b] <= F[a]) and np.any(F[b] < F[a])
            if a_le_b:
                dominated_by[a].append(b)
                dom_count[b] += 1
            elif b_le_a:
                dominated_by[b].append(a)
                dom_count[a] += 1
    fronts = [[i for i in range(n) if dom_count[i] == 0]]
    while fronts[-1]:
        nxt = []
        for a in fronts[-1]:
            for b in dominated_by[a]:
                dom_count[b] -= 1
                if dom_count[b] == 0:
                    nxt.append(b)
        fronts.append(nxt)
    return fronts[:-1]


def crowding_distance(F: np.ndarray) -> np.ndarray:
    n, m = F.shape
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        dist[order[0]] = dist[order[-1]] = np.inf
        span = F[order[-1], j] - F[order[0], j]
        if span <= 0:
            continue
        for k in range(1, n - 1):
            dist[order[k]] += (F[order[k + 1], j] - F[order[k - 1], j]) / span
    return dist


def nsga2_run(problem, budget: int, initial: list[Point], config: NsgaConfig) -> RunResult:
    """Generational NSGA-II over the problem's required constraint set.

    Constraint handling is constraint-domination: feasible individuals beat
    infeasible ones, infeasible ones compare by total violation. Every
    evaluated individual enters the dataset and the archive, feasible or not.
    """
    rng = np.random.default_rng(config.seed)
    space = problem.constraint_space
    genome = _Genome(space)
    mut_prob = config.mutation_prob if config.mutation_prob is not None else 1.0 / genome.n_genes
    record = RunRecord(problem.name, "nsga2", config.seed, {"population": config.population})
    dataset = DataSet(problem.space, problem.n_objectives)
    archive = ParetoArchive(problem.n_objectives, problem.ref_point_min)

    pop_genes: list[np.ndarray] = []
    pop_F: list[np.ndarray] = []
    pop_cv: list[float] = []
    evaluated = 0

    def evaluate(genes: np.ndarray) -> bool:
        nonlocal evaluated
        if evaluated >= budget:
            return False
        point = genome.decode(genes)
        if problem.aux_completer is not None:
            point = Point(point.values, problem.aux_completer(point))
        y_raw = problem.evaluate(point)
        y_min = problem.orient(y_raw)
        cv = total_violation(space, point)
        dataset.append(point, y_min)
        archive.insert(point, y_min)
        pop_genes.append(genes)
        pop_F.append(np.asarray(y_min))
        pop_cv.append(cv)
        hv = clipped_hypervolume_2d(archive.front, problem.ref_point_min)
        record.rows.append(
            IterationRecord(
                iteration=evaluated,
                phase="initial" if evaluated < len(initial) else "proposal",
                point=point,
                y_raw=tuple(float(v) for v in y_raw),
                y_min=tuple(float(v) for v in y_min),
                weights=None,
                solver_status=None,
                solver_gap=None,
                solver_nodes=None,
                hypervolume=hv,
            )
        )
        evaluated += 1
        return True

    for point in initial[: min(budget, len(initial))]:
        evaluate(genome.encode(point))

    def rank_all():
        F = np.vstack(pop_F)
        cv = np.array(pop_cv)
        ranks = np.full(len(F), np.inf)
        feas = np.nonzero(cv <= 1e-9)[0]
        infeas = np.nonzero(cv > 1e-9)[0]
        crowd = np.zeros(len(F))
        if len(feas):
            for r, front in enumerate(fast_nondominated_sort(F[feas])):
                idx = feas[np.array(front, dtype=int)]
                ranks[idx] = r
                crowd[idx] = crowding_distance(F[idx])
        # infeasible individuals rank below every feasible one, by violation
        for idx in infeas:
            ranks[idx] = 1e9 + cv[idx]
        return ranks, crowd

    def tournament(ranks, crowd, a, b):
        if ranks[a] < ranks[b]:
            return a
        if ranks[b] < ranks[a]:
            return b
        if crowd[a] > crowd[b]:
            return a
        if crowd[b] > crowd[a]:
            return b
        return min(a, b)

    while evaluated < budget:
        ranks, crowd = rank_all()
        # environmental selection down to the population size
        order = sorted(range(len(pop_genes)), key=lambda i: (ranks[i], -crowd[i], i))
        keep = order[: config.population]
        pop_genes[:] = [pop_genes[i] for i in keep]
        pop_F[:] = [pop_F[i] for i in keep]
        pop_cv[:] = [pop_cv[i] for i in keep]
        ranks, crowd = rank_all()
        n = len(pop_genes)
        offspring: list[np.ndarray] = []
        while len(offspring) < config.population:
            picks = [
                tournament(ranks, crowd, int(rng.integers(0, n)), int(rng.integers(0, n)))
                for _ in range(2)
            ]
            c1, c2 = _sbx(
                pop_genes[picks[0]],
                pop_genes[picks[1]],
                genome.lo,
                genome.hi,
                config.crossover_eta,
                config.crossover_prob,
                rng,
            )
            for child in (c1, c2):
                offspring.append(
                    _polynomial_mutation(
                        child, genome.lo, genome.hi, config.mutation_eta, mut_prob, rng
                    )
                )
        for child in offspring:
            if not evaluate(child):
                break
    return RunResult(record, archive, dataset)


def random_feasible_run(
    problem,
    budget: int,
    initial: list[Point],
    solve_config: SolveConfig | None = None,
    seed: int = 0,
) -> RunResult:
    """Feasible space-filling search: continued max-min distance draws.

    Every sample is feasible by construction; problems that define rotating
    pinned assignments (e.g. cycling the active-turbine count) rotate them
    across draws.
    """
    solve_config = solve_config or SolveConfig()
    record = RunRecord(problem.name, "random", seed, {})
    dataset = DataSet(problem.space, problem.n_objectives)
    archive = ParetoArchive(problem.n_objectives, problem.ref_point_min)
    points = list(initial[: min(budget, len(initial))])
    while len(points) < budget:
        pin = problem.maxmin_pins(len(points))
        points.append(
            maxmin_sample(
                problem.space,
                points,
                pin,
                solve_config,
                problem.aux_completer,
                problem.repair_hook,
            )
        )
    for it, point in enumerate(points):
        y_raw = problem.evaluate(point)
        y_min = problem.orient(y_raw)
        dataset.append(point, y_min)
        archive.insert(point, y_min)
        record.rows.append(
            IterationRecord(
                iteration=it,
                phase="initial" if it < len(initial) else "proposal",
                point=point,
                y_raw=tuple(float(v) for v in y_raw),
                y_min=tuple(float(v) for v in y_min),
                weights=None,
                solver_status=None,
                solver_gap=None,
                solver_nodes=None,
                hypervolume=clipped_hypervolume_2d(archive.front, problem.ref_point_min),
            )
        )
    return RunResult(record, archive, dataset)
