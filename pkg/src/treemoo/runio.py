"""Run-record persistence: deterministic JSONL files plus a side manifest.

Record files are append-only during a run and contain no wall-clock data, so
two sequential executions of the same seeded experiment produce byte-identical
files. Timing and environment diagnostics go into the separate manifest.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import Point
from .moo import IterationRecord, RunRecord

RECORD_SCHEMA = "treemoo.run/1"


def record_lines(record: RunRecord):
    header = {
        "schema": RECORD_SCHEMA,
        "problem": record.problem,
        "optimizer": record.optimizer,
        "seed": record.seed,
        "config": record.config,
    }
    yield json.dumps(header, sort_keys=True)
    for row in record.rows:
        payload = {
            "iter": row.iteration,
            "phase": row.phase,
            "x": list(row.point.values),
            "y_raw": None if row.y_raw is None else list(row.y_raw),
            "y_min": list(row.y_min),
            "weights": None if row.weights is None else list(row.weights),
            "solver_status": row.solver_status,
            "solver_gap": row.solver_gap,
            "solver_nodes": row.solver_nodes,
            "hypervolume": row.hypervolume,
            "failed": row.failed,
        }
        yield json.dumps(payload, sort_keys=True)


def write_record(record: RunRecord, path: str | Path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        for line in record_lines(record):
            fh.write(line + "\n")


def append_row(path: str | Path, record: RunRecord, row: IterationRecord) -> None:
    """Append-only write so a crash preserves completed iterations."""
    path = Path(path)
    new = not path.exists()
    with path.open("a") as fh:
        if new:
            fh.write(next(record_lines(RunRecord(record.problem, record.optimizer, record.seed, record.config))) + "\n")
        stub = RunRecord(record.problem, record.optimizer, record.seed, record.config, [row])
        lines = list(record_lines(stub))
        fh.write(lines[1] + "\n")


def read_record(path: str | Path) -> RunRecord:
    path = Path(path)
    with path.open() as fh:
        header = json.loads(fh.readline())
        if header.get("schema") != RECORD_SCHEMA:
            raise ValueError(f"{path}: unsupported schema {header.get('schema')!r}")
        record = RunRecord(
            header["problem"], header["optimizer"], header["seed"], header["config"]
        )
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            record.rows.append(
                IterationRecord(
                    iteration=d["iter"],
                    phase=d["phase"],
                    point=Point(tuple(d["x"])),
                    y_raw=None if d["y_raw"] is None else tuple(d["y_raw"]),
                    y_min=tuple(d["y_min"]),
                    weights=None if d["weights"] is None else tuple(d["weights"]),
                    solver_status=d["solver_status"],
                    solver_gap=d["solver_gap"],
                    solver_nodes=d["solver_nodes"],
                    hypervolume=d["hypervolume"],
                    failed=d["failed"],
                )
            )
    return record


def front_of(record: RunRecord, upto: int | None = None) -> np.ndarray:
    """Non-dominated front (minimization orientation) of the first rows."""
    from .core import nondominated_filter

    rows = record.rows if upto is None else record.rows[:upto]
    Y = np.array([r.y_min for r in rows])
    return nondominated_filter(Y)


def write_front(front: np.ndarray, path: str | Path, comment: str = "") -> None:
    header = "schema: treemoo.front/1"
    if comment:
        header += f"\n{comment}"
    np.savetxt(path, np.asarray(front, dtype=float), header=header)


def read_front(path: str | Path) -> np.ndarray:
    return np.loadtxt(path, comments="#", ndmin=2)
