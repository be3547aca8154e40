"""Full-pipeline runs with mock backends, ledger invariants, determinism, and
the CLI surface."""
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from fnrelease import SPLIT_CONFIG

from framegen.cli import main
from framegen.pipeline import PipelineError, RunConfig, run_pipeline
from framegen.util import read_jsonl


def _config(mini_release, tmp_path, **overrides) -> RunConfig:
    values = dict(
        release_dir=str(mini_release),
        output_dir=str(tmp_path / "out"),
        seed=7,
        mode="fe",
        n=1,
    )
    values.update(overrides)
    return RunConfig(**values)


def test_pipeline_identity_run(mini_release, tmp_path):
    config = _config(mini_release, tmp_path)
    ledger = run_pipeline(config)
    out = Path(config.output_dir)
    for name in ("masked.jsonl", "candidates.jsonl", "retained.jsonl", "report.json", "ledger.json"):
        assert (out / name).exists()
        assert not (out / f"{name}.partial").exists()
    stages = ledger["stages"]
    assert stages["expand"]["masked"] > 0
    # identity fills + gold-lookup classifier: everything passes
    assert stages["filter"]["retained"] == stages["filter"]["candidates"]
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["fe_fidelity"] == 1.0
    assert "perplexity" not in report  # no scorer configured


def test_pipeline_identity_texts_match_donors(mini_release, tmp_path):
    config = _config(mini_release, tmp_path)
    run_pipeline(config)
    out = Path(config.output_dir)
    masked = {m["donor_id"]: m for m in read_jsonl(out / "masked.jsonl")}
    for rec in read_jsonl(out / "retained.jsonl"):
        donor = masked[rec["provenance"]["donor_id"]]
        assert rec["text"] == donor["text"]  # byte-equal modulo the LU lemma


@pytest.mark.parametrize("mode", ["none", "fe", "frame_fe"])
@pytest.mark.parametrize("n", [1, 3])
def test_ledger_monotonicity_matrix(mini_release, tmp_path, mode, n):
    config = _config(mini_release, tmp_path / f"{mode}{n}", mode=mode, n=n)
    ledger = run_pipeline(config)
    stages = ledger["stages"]
    retained = stages["filter"]["retained"]
    candidates = stages["generate"]["candidates"]
    masked = stages["expand"]["masked"]
    assert retained <= candidates <= n * masked


def test_pipeline_rerun_byte_identical(mini_release, tmp_path):
    config = _config(mini_release, tmp_path)
    run_pipeline(config)
    out = Path(config.output_dir)
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    run_pipeline(config)
    second = {p.name: p.read_bytes() for p in out.iterdir()}
    assert first == second


def test_pipeline_missing_release_aborts(tmp_path):
    config = RunConfig(
        release_dir=str(tmp_path / "missing"),
        output_dir=str(tmp_path / "out"),
        seed=1,
    )
    with pytest.raises(PipelineError, match="ingest"):
        run_pipeline(config)


def test_pipeline_explicit_targets(mini_release, tmp_path):
    config = _config(mini_release, tmp_path, targets=["reward.v"], n=2)
    ledger = run_pipeline(config)
    assert ledger["stages"]["expand"]["targets"] == 1
    out = Path(config.output_dir)
    for rec in read_jsonl(out / "masked.jsonl"):
        assert rec["lu"] == "reward.v"


def test_pipeline_ledger_has_config_hash(mini_release, tmp_path):
    config = _config(mini_release, tmp_path)
    ledger = run_pipeline(config)
    assert ledger["config_hash"] == config.config_hash()
    assert ledger["backend_calls"]["generator"] >= 1
    assert ledger["backend_calls"]["classifier"] >= 1


# -- CLI ------------------------------------------------------------------------------

@pytest.fixture()
def split_file(tmp_path):
    path = tmp_path / "splits.json"
    path.write_text(json.dumps(SPLIT_CONFIG), encoding="utf-8")
    return path


def test_cli_ingest_stats_coverage(mini_release, split_file, tmp_path):
    runner = CliRunner()
    out = tmp_path / "corpus.jsonl"
    result = runner.invoke(
        main,
        ["ingest", str(mini_release), "--split-config", str(split_file), "-o", str(out)],
    )
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["instances"] == len(out.read_text().splitlines())

    result = runner.invoke(main, ["stats", str(mini_release)])
    assert result.exit_code == 0, result.output
    assert result.output.startswith("pos\tinstances")

    result = runner.invoke(main, ["coverage", str(mini_release)])
    assert result.exit_code == 0
    assert json.loads(result.output.splitlines()[-1])["total_lus"] == 11


def test_cli_relations_dump(mini_release, tmp_path):
    runner = CliRunner()
    out = tmp_path / "edges.jsonl"
    result = runner.invoke(main, ["relations-dump", str(mini_release), "-o", str(out)])
    assert result.exit_code == 0
    assert json.loads(result.output)["edges"] == 3


def test_cli_expand_generate_filter_metrics(mini_release, tmp_path):
    runner = CliRunner()
    masked = tmp_path / "masked.jsonl"
    result = runner.invoke(
        main,
        ["expand", str(mini_release), "-o", str(masked), "--mode", "fe", "--seed", "3"],
    )
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["masked"] > 0

    candidates = tmp_path / "candidates.jsonl"
    result = runner.invoke(
        main, ["generate", "--masked", str(masked), "-o", str(candidates), "-n", "2"]
    )
    assert result.exit_code == 0, result.output

    retained = tmp_path / "retained.jsonl"
    verdicts = tmp_path / "verdicts.jsonl"
    result = runner.invoke(
        main,
        [
            "filter",
            "--candidates", str(candidates),
            "--release-dir", str(mini_release),
            "-o", str(retained),
            "--verdicts-out", str(verdicts),
        ],
    )
    assert result.exit_code == 0, result.output
    counts = json.loads(result.output)
    assert counts["retained"] == counts["candidates"]

    report = tmp_path / "report.json"
    result = runner.invoke(
        main,
        [
            "metrics",
            "--candidates", str(candidates),
            "--verdicts", str(verdicts),
            "-o", str(report),
            "--mock-scorer",
        ],
    )
    assert result.exit_code == 0, result.output
    data = json.loads(report.read_text(encoding="utf-8"))
    assert data["fe_fidelity"] == 1.0
    assert data["perplexity"] > 0

    sheet = tmp_path / "sheet.tsv"
    result = runner.invoke(
        main,
        [
            "review-sheet",
            "--candidates", str(candidates),
            "-k", "2",
            "--seed", "1",
            "-o", str(sheet),
            "--release-dir", str(mini_release),
        ],
    )
    assert result.exit_code == 0, result.output
    assert len(sheet.read_text(encoding="utf-8").splitlines()) == 3


def test_cli_score_srl_and_plans(mini_release, split_file, tmp_path):
    runner = CliRunner()
    corpus = tmp_path / "corpus.jsonl"
    runner.invoke(
        main,
        ["ingest", str(mini_release), "--split-config", str(split_file), "-o", str(corpus)],
    )
    # gold-as-prediction
    gold = read_jsonl(corpus)
    preds = [
        {
            "sentence_id": rec["sentence_id"],
            "lu_id": rec["lu_id"],
            "fes": [
                {"name": f["name"], "start": f["start"], "end": f["end"]}
                for f in rec["fes"]
            ],
        }
        for rec in gold
    ]
    pred_path = tmp_path / "preds.jsonl"
    pred_path.write_text(
        "\n".join(json.dumps(p) for p in preds) + "\n", encoding="utf-8"
    )
    scores = tmp_path / "scores.json"
    result = runner.invoke(
        main,
        ["score-srl", "--gold", str(corpus), "--pred", str(pred_path), "-o", str(scores)],
    )
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["f1"] == 1.0

    plan = tmp_path / "plan.json"
    result = runner.invoke(
        main,
        [
            "plan-aug",
            "--strategy", "removal",
            "--corpus", str(corpus),
            "--release-dir", str(mini_release),
            "-k", "2",
            "--seed", "5",
            "--filter-split", "",
            "-o", str(plan),
        ],
    )
    assert result.exit_code == 0, result.output

    train = tmp_path / "train.jsonl"
    result = runner.invoke(
        main,
        ["emit-train", "--manifest", str(plan), "--corpus", str(corpus), "-o", str(train)],
    )
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["records"] > 0


def test_cli_run_full_pipeline(mini_release, tmp_path):
    runner = CliRunner()
    config = {
        "release_dir": str(mini_release),
        "output_dir": str(tmp_path / "run_out"),
        "seed": 13,
        "mode": "frame_fe",
        "n": 1,
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    result = runner.invoke(main, ["run", "--config", str(config_path)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "run_out" / "ledger.json").exists()


def test_cli_run_missing_release_exits_nonzero(tmp_path):
    runner = CliRunner()
    config = {
        "release_dir": str(tmp_path / "nope"),
        "output_dir": str(tmp_path / "out"),
        "seed": 1,
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    result = runner.invoke(main, ["run", "--config", str(config_path)])
    assert result.exit_code != 0
    assert "ingest" in result.output
