"""Experiment configuration and the batch run harness.

An experiment is one JSON config file describing the problem, the optimizers
to compare, seeds, budgets, and module settings. Cells (optimizer x seed)
run independently; the initial design is generated once per seed and shared
across all optimizers of that seed. The worker count comes from the
TREEMOO_WORKERS environment variable (default 1; cells stay deterministic
either way because each cell is self-contained and seeded).
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .baselines import NsgaConfig, nsga2_run, random_feasible_run
from .bench import get_problem
from .gbrt import GbrtConfig
from .moo import OptimizerConfig, RunResult, run
from .runio import write_record
from .solve import SolveConfig

OPTIMIZERS = ("entmoot", "nsga2", "random")
WORKERS_ENV = "TREEMOO_WORKERS"
CONFIG_SCHEMA = "treemoo.experiment/1"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    optimizers: tuple[str, ...]
    seeds: tuple[int, ...]
    budget: int
    n_initial: int
    kappa: float = 1.96
    similarity: str = "goodall4"
    gbrt: GbrtConfig = field(default_factory=GbrtConfig)
    solve: SolveConfig = field(default_factory=SolveConfig)
    nsga_population: int | None = None  # default: n_initial rounded up to even
    outdir: str = "runs"

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if self.budget < self.n_initial:
            raise ConfigError("budget must be >= n_initial")
        for opt in self.optimizers:
            if opt not in OPTIMIZERS:
                raise ConfigError(f"unknown optimizer {opt!r}; choose from {OPTIMIZERS}")

    def optimizer_config(self, seed: int) -> OptimizerConfig:
        return OptimizerConfig(
            budget=self.budget,
            n_initial=self.n_initial,
            kappa=self.kappa,
            seed=seed,
            gbrt=self.gbrt,
            solve=self.solve,
            similarity=self.similarity,
        )

    def nsga_config(self, seed: int) -> NsgaConfig:
        pop = self.nsga_population
        if pop is None:
            pop = self.n_initial + (self.n_initial % 2)
        return NsgaConfig(population=pop, seed=seed)


def config_from_dict(d: dict, overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from a parsed JSON document plus CLI flag overrides.

    Flags override file fields; nested module settings merge key-by-key.
    """
    data = dict(d)
    data.pop("schema", None)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        data[key] = value
    try:
        gbrt = GbrtConfig(**data.pop("gbrt", {}))
        solve = SolveConfig(**data.pop("solve", {}))
        known = {
            "problem",
            "optimizers",
            "seeds",
            "budget",
            "n_initial",
            "kappa",
            "similarity",
            "nsga_population",
            "outdir",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "problem" not in data:
            raise ConfigError("config needs a 'problem' field")
        return ExperimentConfig(
            problem=data["problem"],
            optimizers=tuple(data.get("optimizers", ("entmoot",))),
            seeds=tuple(int(s) for s in data.get("seeds", (101,))),
            budget=int(data.get("budget", 80)),
            n_initial=int(data.get("n_initial", 10)),
            kappa=float(data.get("kappa", 1.96)),
            similarity=data.get("similarity", "goodall4"),
            gbrt=gbrt,
            solve=solve,
            nsga_population=data.get("nsga_population"),
            outdir=data.get("outdir", "runs"),
        )
    except (TypeError, ValueError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(str(err)) from err


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        with Path(path).open() as fh:
            doc = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}:{err.lineno}: {err.msg}") from err
    return config_from_dict(doc, overrides)


def run_cell(config: ExperimentConfig, optimizer: str, seed: int, initials) -> RunResult:
    problem = get_problem(config.problem)
    if optimizer == "entmoot":
        return run(problem, config.optimizer_config(seed), initial_points=initials)
    if optimizer == "nsga2":
        return nsga2_run(problem, config.budget, initials, config.nsga_config(seed))
    return random_feasible_run(problem, config.budget, initials, config.solve, seed)


def _cell_worker(args):
    config_dict, optimizer, seed, initials, path = args
    config = config_from_dict(config_dict)
    t0 = time.perf_counter()
    result = run_cell(config, optimizer, seed, initials)
    write_record(result.record, path)
    return {
        "optimizer": optimizer,
        "seed": seed,
        "file": str(Path(path).name),
        "wall_time_s": time.perf_counter() - t0,
        "rows": len(result.record.rows),
    }


def config_to_dict(config: ExperimentConfig) -> dict:
    return {
        "schema": CONFIG_SCHEMA,
        "problem": config.problem,
        "optimizers": list(config.optimizers),
        "seeds": list(config.seeds),
        "budget": config.budget,
        "n_initial": config.n_initial,
        "kappa": config.kappa,
        "similarity": config.similarity,
        "nsga_population": config.nsga_population,
        "outdir": config.outdir,
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


def run_experiment(config: ExperimentConfig) -> Path:
    """Run every (optimizer, seed) cell; returns the output directory."""
    import numpy as np

    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    problem = get_problem(config.problem)
    shared: dict[int, list] = {}
    for seed in config.seeds:
        rng = np.random.default_rng(seed)
        shared[seed] = problem.initial_design(config.n_initial, rng, config.solve)
    jobs = []
    for optimizer in config.optimizers:
        for seed in config.seeds:
            path = outdir / f"{config.problem}_{optimizer}_seed{seed}.jsonl"
            jobs.append((config_to_dict(config), optimizer, seed, shared[seed], str(path)))
    workers = int(os.environ.get(WORKERS_ENV, "1"))
    t0 = time.perf_counter()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_cell_worker, jobs))
    else:
        cells = [_cell_worker(job) for job in jobs]
    manifest = {
        "schema": "treemoo.manifest/1",
        "code_version": __version__,
        "config": config_to_dict(config),
        "total_wall_time_s": time.perf_counter() - t0,
        "cells": cells,
    }
    with (outdir / "manifest.json").open("w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    return outdir
