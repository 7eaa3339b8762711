"""CLI and experiment-harness tests."""

import json
from pathlib import Path

import numpy as np
import pytest

from treemoo.cli import main


def _write_config(path: Path, **overrides) -> Path:
    cfg = {
        "schema": "treemoo.experiment/1",
        "problem": "schaffer",
        "optimizers": ["entmoot", "random"],
        "seeds": [101, 102],
        "budget": 14,
        "n_initial": 6,
        "gbrt": {"num_trees": 10, "max_bins": 16},
        "solve": {"rel_gap": 1e-3, "time_limit_secs": 1e9, "node_limit": 5000},
        "outdir": str(path / "runs"),
    }
    cfg.update(overrides)
    p = path / "config.json"
    p.write_text(json.dumps(cfg))
    return p


def test_run_report_round_trip(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    assert main(["run", str(cfg)]) == 0
    runs = sorted((tmp_path / "runs").glob("*.jsonl"))
    assert len(runs) == 4  # 2 optimizers x 2 seeds
    manifest = json.loads((tmp_path / "runs" / "manifest.json").read_text())
    assert manifest["schema"] == "treemoo.manifest/1"
    assert len(manifest["cells"]) == 4

    front = tmp_path / "front.tsv"
    assert main(["truefront", "schaffer", "--samples", "20000", "--out", str(front)]) == 0
    rep = tmp_path / "report"
    assert (
        main(
            ["report", str(tmp_path / "runs" / "*.jsonl"), "--true-front", str(front),
             "--outdir", str(rep)]
        )
        == 0
    )
    assert (rep / "metrics.tsv").exists()
    assert (rep / "hv_curve_entmoot.tsv").exists()
    assert (rep / "best_front_random.tsv").exists()
    table = (rep / "metrics.tsv").read_text()
    assert table.startswith("# schema: treemoo.table/1")

    # report is idempotent: a second pass produces identical tables
    rep2 = tmp_path / "report2"
    main(["report", str(tmp_path / "runs" / "*.jsonl"), "--true-front", str(front),
          "--outdir", str(rep2)])
    assert (rep2 / "metrics.tsv").read_text() == table


def test_byte_identical_reruns(tmp_path):
    cfg = _write_config(tmp_path, outdir=str(tmp_path / "a"), seeds=[101])
    assert main(["run", str(cfg)]) == 0
    cfg2 = _write_config(tmp_path, outdir=str(tmp_path / "b"), seeds=[101])
    assert main(["run", str(cfg2)]) == 0
    a = (tmp_path / "a" / "schaffer_entmoot_seed101.jsonl").read_bytes()
    b = (tmp_path / "b" / "schaffer_entmoot_seed101.jsonl").read_bytes()
    assert a == b


def test_unknown_problem_lists_available(tmp_path, capsys):
    cfg = _write_config(tmp_path, problem="nonesuch")
    assert main(["run", str(cfg)]) == 1
    err = capsys.readouterr().err
    assert "schaffer" in err and "windfarm" in err


def test_invalid_config_reports_location(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json }")
    assert main(["run", str(bad)]) == 1
    assert "config error" in capsys.readouterr().err


def test_unknown_field_rejected(tmp_path, capsys):
    cfg = _write_config(tmp_path, bogus_field=1)
    assert main(["run", str(cfg)]) == 1
    assert "bogus_field" in capsys.readouterr().err


def test_flag_overrides_file(tmp_path):
    cfg = _write_config(tmp_path, outdir=str(tmp_path / "x"))
    assert main(["run", str(cfg), "--budget", "8", "--seeds", "101",
                 "--optimizers", "random", "--outdir", str(tmp_path / "y")]) == 0
    runs = list((tmp_path / "y").glob("*.jsonl"))
    assert len(runs) == 1
    lines = runs[0].read_text().splitlines()
    assert len(lines) == 1 + 8  # header + budget rows


def test_checkpoint_beyond_budget_omitted(tmp_path):
    from treemoo.report import checkpoint_metrics
    from treemoo.runio import read_record
    from treemoo.bench.synthetic import true_front

    cfg = _write_config(tmp_path, budget=12, seeds=[101], optimizers=["random"])
    main(["run", str(cfg)])
    rec = read_record(next((tmp_path / "runs").glob("*.jsonl")))
    rows = checkpoint_metrics([rec], true_front("schaffer", 10_000))
    cps = {r["checkpoint"] for r in rows}
    assert cps == {10}  # 20/40/60/80 omitted


def test_mixed_problem_reports_error(tmp_path, capsys):
    cfg1 = _write_config(tmp_path, outdir=str(tmp_path / "mix"), seeds=[101],
                         optimizers=["random"], budget=8)
    main(["run", str(cfg1)])
    cfg2 = _write_config(tmp_path, problem="s_plus", outdir=str(tmp_path / "mix"),
                         seeds=[101], optimizers=["random"], budget=8)
    main(["run", str(cfg2)])
    assert main(["report", str(tmp_path / "mix" / "*.jsonl"), "--outdir",
                 str(tmp_path / "mixrep")]) == 2
    assert "mix problems" in capsys.readouterr().err


def test_init_sample_writes_points(tmp_path):
    out = tmp_path / "pts.jsonl"
    assert main(["init-sample", "schaffer", "--n", "4", "--seed", "7", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 5
    xs = [json.loads(l)["x"][0] for l in lines[1:]]
    assert len(set(xs)) == 4


def test_solve_fixture_round_trip(tmp_path, capsys):
    import sys

    sys.path.insert(0, str(Path(__file__).parent))
    from oracles import random_fixture
    from treemoo.encode import AcquisitionSpec, dump_fixture

    rng = np.random.default_rng(5)
    space, ensembles, X, Y = random_fixture(rng, n_cont=1, n_cat=1, n_labels=2, n_data=6, n_trees=2)
    spec = AcquisitionSpec(np.array([0.5, 0.5]), 1.96, Y.min(axis=0), Y.max(axis=0))
    doc = dump_fixture(space, ensembles, spec, X)
    path = tmp_path / "fixture.json"
    path.write_text(json.dumps(doc))
    assert main(["solve-fixture", str(path), "--rel-gap", "1e-6"]) == 0
    out = capsys.readouterr().out
    assert "status=optimal" in out and "objective=" in out
    assert main(["solve-fixture", str(path), "--dump-model"]) == 0
    assert "objective: minimize" in capsys.readouterr().out


def test_truefront_rejects_non_synthetic(tmp_path, capsys):
    assert main(["truefront", "windfarm", "--out", str(tmp_path / "f.tsv")]) == 1
    assert "no analytic front" in capsys.readouterr().err
