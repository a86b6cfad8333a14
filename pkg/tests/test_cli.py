from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from branchlab.__main__ import build_parser, main
from branchlab.bnb.score import DualBoundTrace
from branchlab.cli.evaluate import CSV_COLUMNS, RunRow, format_ablation, read_csv_rows, reference_optima
from branchlab.cli.layout import RunLayout
from branchlab.cli.manifest import file_digest, read_manifest
from branchlab.cli.pipeline import cmd_collect, cmd_generate, cmd_pretrain, split_heldout
from branchlab.errors import MissingArtifact
from branchlab.util.config import ExperimentConfig

TINY: dict[str, Any] = {
    "name": "tiny",
    "families": {
        "setcover": {"rows": 20, "cols": 30, "density": 0.15},
        "indset": {"nodes": 14, "affinity": 2},
    },
    "instances": {"train": 4, "test": 2},
    "limits": {"node_limit": 200, "time_limit_s": 60, "score_T": 0.5},
    "seeds": [0, 1],
    "training": {
        "hidden": 8,
        "collect_node_cap": 6,
        "heldout_frac": 0.25,
        "pretrain_epochs": 2,
        "ppo_epochs": 1,
        "mcts_k": 3,
        "mcts_sims": 10,
        "mcts_roots": 2,
        "visit_threshold": 3,
        "refine_epochs": 1,
    },
    "evaluation": {"clock": "fake"},
}


def _write_config(tmp_path: Path, **over: Any) -> Path:
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps({**TINY, **over}), encoding="utf-8")
    return p


def _run_all(config: Path, out: Path) -> None:
    for cmd in ("generate", "collect", "pretrain", "train-ppo", "refine-mcts", "evaluate"):
        main([cmd, "--config", str(config), "--out", str(out), "--log-level", "WARNING"])


def _table(summary: str, title: str) -> dict[tuple[str, str], float]:
    lines = summary.splitlines()
    start = lines.index(f"## {title}")
    header = [c.strip() for c in lines[start + 2].strip("|").split("|")]
    out: dict[tuple[str, str], float] = {}
    for ln in lines[start + 4 :]:
        if not ln.startswith("|"):
            break
        cells = [c.strip() for c in ln.strip("|").split("|")]
        for fam, cell in zip(header[1:-1], cells[1:-1]):
            if cell != "-":
                out[(cells[0], fam)] = float(cell.split("±")[0])
    return out


def test_parser_knows_every_stage() -> None:
    parser = build_parser()
    for cmd in ("generate", "collect", "pretrain", "train-ppo", "refine-mcts", "evaluate"):
        args = parser.parse_args([cmd, "--config", "x.yaml", "--seed", "3"])
        assert args.cmd == cmd and args.seed == 3
    with pytest.raises(SystemExit):
        parser.parse_args(["generate"])


def test_version_flag(capsys: pytest.CaptureFixture[str]) -> None:
    main(["--version"])
    assert capsys.readouterr().out.startswith("branchlab ")


def test_errors_exit_with_a_one_line_message(tmp_path: Path) -> None:
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--config", str(tmp_path / "absent.yaml")])
    assert str(exc.value.code).startswith("ERROR:")


def test_pretrain_without_dataset_names_the_path(tmp_path: Path) -> None:
    cfg = ExperimentConfig.from_dict(TINY)
    with pytest.raises(MissingArtifact) as exc:
        cmd_pretrain(cfg, tmp_path / "run")
    assert exc.value.path == str(RunLayout(tmp_path / "run", cfg).sb_train)
    with pytest.raises(MissingArtifact):
        cmd_collect(cfg, tmp_path / "run")


def test_generate_is_idempotent(tmp_path: Path) -> None:
    cfg = ExperimentConfig.from_dict(TINY)
    root = tmp_path / "run"
    first = cmd_generate(cfg, root)
    assert not first.skipped and len(first.outputs) == 2 * (4 + 2)
    hashes = {p.name: file_digest(p) for p in first.outputs}

    again = cmd_generate(cfg, root)
    assert again.skipped
    assert {p.name: file_digest(p) for p in again.outputs} == hashes

    # losing the manifest forces a rebuild with identical bytes
    (root / "instances" / "manifest-generate.json").unlink()
    rebuilt = cmd_generate(cfg, root)
    assert not rebuilt.skipped
    assert {p.name: file_digest(p) for p in rebuilt.outputs} == hashes


def test_generate_reruns_when_an_output_changes(tmp_path: Path) -> None:
    cfg = ExperimentConfig.from_dict(TINY)
    root = tmp_path / "run"
    first = cmd_generate(cfg, root)
    first.outputs[0].write_text("{}", encoding="utf-8")
    assert not cmd_generate(cfg, root).skipped
    manifest = read_manifest(root / "instances", "generate")
    assert manifest is not None and manifest.extra == {"instances": 12}


def test_heldout_split_takes_the_tail_of_each_family() -> None:
    paths = {"a": [Path(f"a{i}") for i in range(5)], "b": [Path(f"b{i}") for i in range(4)]}
    train, held = split_heldout(paths, 0.25)
    assert held == [Path("a4"), Path("b3")]
    assert len(train) == 7


def test_reference_optima_prefer_optimal_runs() -> None:
    rows = [
        RunRow("f", "i1", "random", 0, 5, 0.1, "Optimal", objective=-3.0),
        RunRow("f", "i1", "fsb", 0, 9, 0.1, "NodeLimit", objective=-4.0),
        RunRow("f", "i2", "fsb", 0, 9, 0.1, "NodeLimit", objective=-2.0),
        RunRow("f", "i2", "random", 0, 9, 0.1, "TimeLimit", objective=-2.5),
        RunRow("f", "i3", "random", 0, 0, 0.0, "Failed"),
    ]
    assert reference_optima(rows) == {"i1": -3.0, "i2": -2.5}


def test_ablation_reports_the_score_difference() -> None:
    def row(strategy: str, score: float) -> RunRow:
        return RunRow("f", "i", strategy, 0, 1, 0.0, "Optimal", trace=DualBoundTrace(), score=score)

    md, diffs = format_ablation([row("policy", -2.0), row("policy+mcts", -1.5), row("policy", -3.0)], ["f", "g"])
    assert diffs == {"f": pytest.approx(1.0, abs=1e-12)}
    assert "| g | - | - | - |" in md


@pytest.mark.slow
def test_tiny_pipeline_end_to_end(tmp_path: Path) -> None:
    config = _write_config(tmp_path)
    _run_all(config, tmp_path / "a")
    _run_all(config, tmp_path / "b")

    results = tmp_path / "a" / "results"
    text_a = (results / "runs.csv").read_text(encoding="utf-8")
    assert text_a == (tmp_path / "b" / "results" / "runs.csv").read_text(encoding="utf-8")
    assert text_a.splitlines()[0] == "# clock=fake-1ms-per-lp"
    assert text_a.splitlines()[1].split(",") == CSV_COLUMNS

    rows = read_csv_rows(results / "runs.csv")
    strategies = ["random", "fsb", "mostinf", "gcnn", "policy", "policy+mcts"]
    assert len(rows) == 2 * 2 * len(strategies) * 2
    assert {r["strategy"] for r in rows} == set(strategies)

    summary = (results / "summary.md").read_text(encoding="utf-8")
    nodes = _table(summary, "Nodes")
    for (strategy, fam), mean in nodes.items():
        vals = [
            float(r["nodes"])
            for r in rows
            if r["strategy"] == strategy and r["family"] == fam and r["status"] != "Failed"
        ]
        assert mean == pytest.approx(float(np.mean(vals)), rel=1e-9)
    for r in rows:
        if r["status"] == "Optimal":
            assert float(r["score"]) <= 1e-9

    reference = json.loads((results / "reference.json").read_text(encoding="utf-8"))
    assert len(reference) == 4
    assert (results / "ablation.md").exists()
    assert read_manifest(results, "evaluate") is not None
    for stem in ("gcnn", "ppo", "mcts"):
        assert (tmp_path / "a" / "checkpoints" / f"{stem}.json").exists()

    # a finished pipeline reruns its training stages as no-ops
    cfg = ExperimentConfig.from_dict(json.loads(config.read_text(encoding="utf-8")))
    assert cmd_pretrain(cfg, tmp_path / "a").skipped
