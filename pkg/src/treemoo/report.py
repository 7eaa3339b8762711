"""Post-hoc reporting: checkpoint metric tables, hypervolume curves, fronts.

All outputs are delimited text with a schema header line, ready for any
plotting tool. Metrics are computed in raw objective units; the formatted
summary table applies the conventional x100 display scaling to GD and IGD.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import metrics
from .bench import synthetic
from .moo import RunRecord
from .runio import front_of, write_front

CHECKPOINTS = (10, 20, 40, 60, 80)
TABLE_SCHEMA = "treemoo.table/1"
CURVE_SCHEMA = "treemoo.curve/1"


def _quartiles(values) -> tuple[float, float, float, float]:
    arr = np.asarray(values, dtype=float)
    return (
        float(np.median(arr)),
        float(np.quantile(arr, 0.25)),
        float(np.quantile(arr, 0.75)),
        float(arr.std(ddof=0)),
    )


def _reference_point(problem: str) -> np.ndarray | None:
    sp = synthetic.SYNTHETIC_PROBLEMS.get(problem)
    if sp is None:
        return None
    return np.array(sp.reference_point)


def checkpoint_metrics(
    records: list[RunRecord],
    true_front: np.ndarray,
    checkpoints=CHECKPOINTS,
) -> list[dict]:
    """Per-(optimizer, checkpoint, metric) medians and quartiles."""
    problems = {r.problem for r in records}
    if len(problems) != 1:
        raise ValueError(f"records mix problems: {sorted(problems)}")
    problem = problems.pop()
    ref = _reference_point(problem)
    budget = max(len(r.rows) for r in records)
    rows = []
    by_opt: dict[str, list[RunRecord]] = {}
    for r in records:
        by_opt.setdefault(r.optimizer, []).append(r)
    for optimizer in sorted(by_opt):
        group = by_opt[optimizer]
        for cp in checkpoints:
            if cp > budget:
                continue
            per_metric: dict[str, list[float]] = {"gd": [], "igd": [], "mpfe": [], "vr": []}
            for rec in group:
                if cp > len(rec.rows):
                    continue
                front = front_of(rec, cp)
                per_metric["gd"].append(metrics.gd(front, true_front))
                per_metric["igd"].append(metrics.igd(front, true_front))
                per_metric["mpfe"].append(metrics.mpfe(front, true_front))
                if ref is not None:
                    v = metrics.vr(front, true_front, ref)
                    per_metric["vr"].append(v if math.isfinite(v) else 1e9)
            for name, values in per_metric.items():
                if not values:
                    continue
                med, q1, q3, sd = _quartiles(values)
                rows.append(
                    {
                        "problem": problem,
                        "optimizer": optimizer,
                        "checkpoint": cp,
                        "metric": name,
                        "median": med,
                        "q1": q1,
                        "q3": q3,
                        "sd": sd,
                        "runs": len(values),
                    }
                )
    return rows


def write_metric_table(rows: list[dict], path: str | Path) -> None:
    cols = ["problem", "optimizer", "checkpoint", "metric", "median", "q1", "q3", "sd", "runs"]
    with Path(path).open("w") as fh:
        fh.write(f"# schema: {TABLE_SCHEMA}\n")
        fh.write("\t".join(cols) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(row[c]) for c in cols) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def format_summary_table(rows: list[dict]) -> str:
    """Paper-style summary: one block per checkpoint, GD and IGD shown x100."""
    optimizers = sorted({r["optimizer"] for r in rows})
    checkpoints = sorted({r["checkpoint"] for r in rows})
    lookup = {(r["optimizer"], r["checkpoint"], r["metric"]): r for r in rows}
    lines = ["Itr  " + "  ".join(
        f"{m}[{o}]" for m in ("GDx100", "IGDx100", "MPFE", "VR") for o in optimizers
    )]
    for cp in checkpoints:
        cells = [f"{cp:<4d}"]
        for metric, scale in (("gd", 100.0), ("igd", 100.0), ("mpfe", 1.0), ("vr", 1.0)):
            for o in optimizers:
                r = lookup.get((o, cp, metric))
                cells.append("-" if r is None else f"{r['median'] * scale:.2f}({r['sd'] * scale:.2f})")
        lines.append("  ".join(cells))
    return "\n".join(lines)


def hypervolume_curves(records: list[RunRecord]) -> dict[str, np.ndarray]:
    """Per optimizer: columns (evaluations, median hv, q1, q3)."""
    by_opt: dict[str, list[RunRecord]] = {}
    for r in records:
        by_opt.setdefault(r.optimizer, []).append(r)
    out = {}
    for optimizer, group in by_opt.items():
        budget = min(len(r.rows) for r in group)
        table = np.zeros((budget, 4))
        for k in range(budget):
            vals = [rec.rows[k].hypervolume for rec in group]
            med, q1, q3, _ = _quartiles(vals)
            table[k] = (k + 1, med, q1, q3)
        out[optimizer] = table
    return out


def write_curves(curves: dict[str, np.ndarray], outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    written = []
    for optimizer, table in sorted(curves.items()):
        path = outdir / f"hv_curve_{optimizer}.tsv"
        np.savetxt(
            path,
            table,
            header=f"schema: {CURVE_SCHEMA}\nevaluations median_hv q1_hv q3_hv",
        )
        written.append(path)
    return written


def write_best_fronts(records: list[RunRecord], outdir: str | Path) -> list[Path]:
    """Front of the best-final-hypervolume run per optimizer, minimization units."""
    outdir = Path(outdir)
    by_opt: dict[str, list[RunRecord]] = {}
    for r in records:
        by_opt.setdefault(r.optimizer, []).append(r)
    written = []
    for optimizer, group in sorted(by_opt.items()):
        best = max(group, key=lambda rec: rec.rows[-1].hypervolume)
        path = outdir / f"best_front_{optimizer}.tsv"
        write_front(front_of(best), path, comment=f"optimizer: {optimizer} seed: {best.seed}")
        written.append(path)
    return written
