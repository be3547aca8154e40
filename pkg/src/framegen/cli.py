"""Command-line entry point wiring the pipeline stages.

Backend endpoints can be supplied per command or through the environment
variables FRAMEGEN_GENERATOR_URL, FRAMEGEN_CLASSIFIER_URL, and
FRAMEGEN_SCORER_URL; without an endpoint, commands fall back to the bundled
mock backends.
"""
from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import srl as srl_mod
from .backends import (
    GoldLookupClassifier,
    HttpClassifierBackend,
    HttpGeneratorBackend,
    HttpScorerBackend,
    IdentityGenerator,
    UniformScorer,
)
from .expand import (
    CandidateSelector,
    ConditioningMode,
    MaskedInstance,
    donors_by_lu,
    expand_lu,
    expansion_targets,
)
from .genfilter import (
    Decoding,
    FilterVerdict,
    GenerationCandidate,
    build_request,
    candidate_record,
    fe_fidelity,
    overgenerate,
    strict_filter,
)
from .lexicon import (
    Pos,
    coverage_report,
    explode_fulltext,
    pos_stats,
    read_corpus_jsonl,
    split_sizes,
)
from .metrics import assemble_report, emit_review_sheet, perplexity, rouge, self_bleu
from .pipeline import PipelineError, RunConfig, dump_corpus, run_pipeline
from .release import load_release
from .relations import RelationGraph
from .util import map_bounded, read_jsonl, write_jsonl

log = logging.getLogger(__name__)

GENERATOR_ENV = "FRAMEGEN_GENERATOR_URL"
CLASSIFIER_ENV = "FRAMEGEN_CLASSIFIER_URL"
SCORER_ENV = "FRAMEGEN_SCORER_URL"


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Toolkit for expanding a frame-semantic lexicon with generated sentences."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _load(release_dir, split_config):
    lexicon, corpus = load_release(release_dir, split_config)
    return lexicon, corpus


@main.command()
@click.argument("release_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--split-config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
def ingest(release_dir, split_config, output):
    """Parse a release and write the canonical exploded JSONL corpus dump."""
    counts = dump_corpus(release_dir, split_config, output)
    click.echo(json.dumps(counts))


@main.command()
@click.argument("release_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--split-config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--include-core-unexpressed", is_flag=True)
def stats(release_dir, split_config, include_core_unexpressed):
    """Per-POS instance counts and FE/core/candidate averages."""
    lexicon, corpus = _load(release_dir, split_config)
    selector = CandidateSelector(lexicon, RelationGraph(lexicon))
    rows = pos_stats(
        lexicon, corpus, selector, core_includes_unexpressed=include_core_unexpressed
    )
    click.echo("pos\tinstances\tavg_fes\tavg_core_fes\tavg_candidate_fes")
    for pos, row in sorted(rows.items(), key=lambda kv: -kv[1].instances):
        click.echo(
            f"{pos.value}\t{row.instances}\t{row.avg_fes:.3f}"
            f"\t{row.avg_core_fes:.3f}\t{row.avg_candidate_fes:.3f}"
        )
    sizes = split_sizes(corpus)
    click.echo(json.dumps({"split_sizes": sizes}))


@main.command()
@click.argument("release_dir", type=click.Path(exists=True, file_okay=False))
def coverage(release_dir):
    """Fraction of LUs with annotations."""
    lexicon, _ = _load(release_dir, None)
    report = coverage_report(lexicon)
    click.echo(
        json.dumps(
            {
                "total_lus": report.total_lus,
                "annotated_lus": report.annotated_lus,
                "fraction": report.fraction,
            }
        )
    )


@main.command("relations-dump")
@click.argument("release_dir", type=click.Path(exists=True, file_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
def relations_dump(release_dir, output):
    """Write all FE relation edges as JSONL."""
    lexicon, _ = _load(release_dir, None)
    n = RelationGraph(lexicon).dump_edges_jsonl(output)
    click.echo(json.dumps({"edges": n}))


@main.command()
@click.argument("release_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--split-config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.option("--mode", type=click.Choice([m.value for m in ConditioningMode]), default="frame_fe")
@click.option("--targets", default=None, help="Comma-separated LU labels (e.g. reward.v).")
@click.option("--max-targets", type=int, default=None)
@click.option("--instances-per-target", type=int, default=1)
@click.option("--seed", type=int, default=0)
@click.option("--all-pos", is_flag=True, help="Expand LUs of any POS, not only verbs.")
def expand(release_dir, split_config, output, mode, targets, max_targets,
           instances_per_target, seed, all_pos):
    """Produce masked replacement instances for target LUs."""
    import random

    lexicon, corpus = _load(release_dir, split_config)
    graph = RelationGraph(lexicon)
    selector = CandidateSelector(lexicon, graph)
    donor_index = donors_by_lu(corpus)
    if targets:
        ids = []
        for label in targets.split(","):
            matches = lexicon.lus_labeled(label.strip())
            if not matches:
                raise click.ClickException(f"no LU labeled {label.strip()!r}")
            ids.extend(lu.id for lu in matches)
        ids = sorted(set(ids))
    else:
        pos = None if all_pos else Pos.V
        ids = [lu.id for lu in expansion_targets(lexicon, pos=pos, annotated=False)]
        if max_targets is not None and len(ids) > max_targets:
            ids = sorted(random.Random(seed).sample(ids, max_targets))
    masked = []
    for target in ids:
        masked.extend(
            expand_lu(target, lexicon, graph, donor_index, selector,
                      ConditioningMode(mode), limit=instances_per_target)
        )
    write_jsonl(output, (m.to_dict() for m in masked))
    click.echo(json.dumps({"targets": len(ids), "masked": len(masked)}))


def _generator_backend(url):
    import os

    url = url or os.environ.get(GENERATOR_ENV)
    return HttpGeneratorBackend(url) if url else IdentityGenerator()


@main.command()
@click.option("--masked", "masked_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.option("-n", "n", type=int, default=1, help="Candidates per instance.")
@click.option("--seed", type=int, default=0)
@click.option("--temperature", type=float, default=0.7)
@click.option("--max-span-tokens", type=int, default=24)
@click.option("--generator-url", default=None)
@click.option("--concurrency", type=int, default=4)
def generate(masked_path, output, n, seed, temperature, max_span_tokens, generator_url, concurrency):
    """Overgenerate candidate fills for masked instances."""
    backend = _generator_backend(generator_url)
    decoding = Decoding(temperature=temperature, max_span_tokens=max_span_tokens, seed=seed)
    masked = [MaskedInstance.from_dict(d) for d in read_jsonl(masked_path)]
    lists = map_bounded(
        lambda m: overgenerate(build_request(m, n=n, decoding=decoding), backend),
        masked,
        concurrency,
    )
    candidates = [c for lst in lists for c in lst]
    write_jsonl(output, (c.to_dict() for c in candidates))
    click.echo(json.dumps({"instances": len(masked), "candidates": len(candidates)}))


@main.command("filter")
@click.option("--candidates", "candidates_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--release-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--split-config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.option("--verdicts-out", type=click.Path(dir_okay=False), default=None)
@click.option("--classifier-url", default=None)
@click.option("--concurrency", type=int, default=4)
def filter_cmd(candidates_path, release_dir, split_config, output, verdicts_out,
               classifier_url, concurrency):
    """Apply the strict FE-fidelity filter to generation candidates."""
    import os

    lexicon, corpus = _load(release_dir, split_config)
    url = classifier_url or os.environ.get(CLASSIFIER_ENV)
    if url:
        backend = HttpClassifierBackend(url)
    else:
        backend = GoldLookupClassifier.from_sentences(explode_fulltext(corpus), lexicon)
    candidates = [GenerationCandidate.from_dict(d) for d in read_jsonl(candidates_path)]
    result = strict_filter(candidates, backend, lexicon, max_workers=concurrency)
    retained = [
        candidate_record(c, v.fidelity)
        for c, v in zip(candidates, result.verdicts)
        if v.passed
    ]
    write_jsonl(output, retained)
    if verdicts_out:
        write_jsonl(verdicts_out, (v.to_dict() for v in result.verdicts))
    click.echo(
        json.dumps(
            {
                "candidates": len(candidates),
                "retained": len(retained),
                "unverifiable": result.n_unverifiable,
            }
        )
    )


@main.command("metrics")
@click.option("--candidates", "candidates_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--verdicts", "verdicts_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.option("--scorer-url", default=None)
@click.option("--mock-scorer", is_flag=True, help="Use the uniform mock scorer.")
def metrics_cmd(candidates_path, verdicts_path, output, scorer_url, mock_scorer):
    """Aggregate metrics over candidates (and verdicts when available)."""
    import os

    candidates = [GenerationCandidate.from_dict(d) for d in read_jsonl(candidates_path)]
    verdicts = None
    retained = candidates
    fidelity = None
    if verdicts_path:
        verdicts = [
            FilterVerdict(
                per_span=tuple(),
                fidelity=d["fidelity"],
                passed=d["passed"],
                unverifiable=d.get("unverifiable", False),
            )
            for d in read_jsonl(verdicts_path)
        ]
        if len(verdicts) != len(candidates):
            raise click.ClickException("verdicts and candidates files differ in length")
        retained = [c for c, v in zip(candidates, verdicts) if v.passed]
        scored = [d for d in read_jsonl(verdicts_path) if d.get("per_span")]
        total = sum(len(d["per_span"]) for d in scored)
        matched = sum(
            1 for d in scored for sv in d["per_span"] if sv["fe_expected"] == sv["fe_predicted"]
        )
        fidelity = matched / total if total else None

    url = scorer_url or os.environ.get(SCORER_ENV)
    scorer = HttpScorerBackend(url) if url else (UniformScorer() if mock_scorer else None)

    rouge1 = rougeL = None
    scorable = [c for c in retained if c.original_fills]
    if scorable:
        r1 = sum(rouge(list(c.fills), list(c.original_fills))["rouge1"] for c in scorable)
        rl = sum(rouge(list(c.fills), list(c.original_fills))["rougeL"] for c in scorable)
        rouge1, rougeL = r1 / len(scorable), rl / len(scorable)
    diversity = self_bleu([c.text for c in retained]) if len(retained) >= 2 else None
    ppl = perplexity([c.text for c in retained], scorer) if scorer and retained else None
    report = assemble_report(
        n_before=len(candidates),
        n_after=len(retained),
        fe_fidelity=fidelity,
        perplexity=ppl,
        rouge1=rouge1,
        rougeL=rougeL,
        self_bleu=diversity,
    )
    Path(output).write_text(report.to_json(), encoding="utf-8")
    click.echo(report.to_json().strip())


@main.command("review-sheet")
@click.option("--candidates", "candidates_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("-k", "k", type=int, required=True)
@click.option("--seed", type=int, default=0)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.option("--release-dir", type=click.Path(exists=True, file_okay=False), default=None)
def review_sheet(candidates_path, k, seed, output, release_dir):
    """Sample candidates into a tab-separated human-review sheet."""
    candidates = [GenerationCandidate.from_dict(d) for d in read_jsonl(candidates_path)]
    lexicon = _load(release_dir, None)[0] if release_dir else None
    n = emit_review_sheet(candidates, k, seed, output, lexicon=lexicon)
    click.echo(json.dumps({"rows": n}))


@main.command("score-srl")
@click.option("--gold", "gold_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--pred", "pred_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
def score_srl_cmd(gold_path, pred_path, output):
    """Exact-span micro P/R/F1 with per-LU aggregates."""
    gold = read_corpus_jsonl(gold_path)
    preds = [srl_mod.SrlPrediction.from_dict(d) for d in read_jsonl(pred_path)]
    score = srl_mod.score_srl(gold, preds)
    rendered = json.dumps(score.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n"
    if output:
        Path(output).write_text(rendered, encoding="utf-8")
    click.echo(json.dumps({"precision": score.precision, "recall": score.recall, "f1": score.f1}))


@main.command("plan-aug")
@click.option("--strategy", type=click.Choice(["oracle", "removal", "inverse-f1", "low-resource"]), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--release-dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--scores", "scores_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--threshold", type=float, default=0.75)
@click.option("-k", "k", type=int, default=150)
@click.option("--budget", type=int, default=None)
@click.option("--base-fraction", type=float, default=0.25)
@click.option("--aug-fraction", type=float, default=0.0625)
@click.option("--source", type=click.Choice(["generated", "human_held_out"]), default="generated")
@click.option("--generated", "generated_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=0)
@click.option("--filter-split", default="train")
@click.option("--filter-source", default=None)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
def plan_aug(strategy, corpus_path, release_dir, scores_path, threshold, k, budget,
             base_fraction, aug_fraction, source, generated_path, seed,
             filter_split, filter_source, output):
    """Build an augmentation plan and dataset manifest."""
    records = read_corpus_jsonl(corpus_path)
    if filter_split:
        filtered = [r for r in records if r.split == filter_split]
        records = filtered or records
    if filter_source:
        records = [r for r in records if r.source == filter_source]
    if not records:
        raise click.ClickException("no corpus records left after filtering")

    if strategy == "removal":
        if not release_dir:
            raise click.ClickException("--release-dir required for LU POS lookups")
        lexicon, _ = _load(release_dir, None)
        plan, manifest = srl_mod.plan_non_oracle_removal(records, lexicon, k=k, seed=seed)
    elif strategy == "oracle":
        if not (release_dir and scores_path):
            raise click.ClickException("--release-dir and --scores required")
        lexicon, _ = _load(release_dir, None)
        raw = json.loads(Path(scores_path).read_text(encoding="utf-8"))
        scores = [
            srl_mod.LuScore(s["lu_id"], s["tp"], s["fp"], s["fn"]) for s in raw["per_lu"]
        ]
        selected = sorted(srl_mod.select_oracle_lus(scores, lexicon, threshold=threshold))
        plan = srl_mod.AugmentationPlan(
            strategy=srl_mod.Strategy.ORACLE_THRESHOLD,
            selected_lus=tuple(selected),
            base_fraction=1.0,
            aug_fraction=0.0,
            seed=seed,
        )
        manifest = srl_mod.Manifest(
            base_instance_ids=tuple(r.instance_id for r in records),
            regenerate_lus=tuple(selected),
        )
    elif strategy == "inverse-f1":
        if not scores_path or budget is None:
            raise click.ClickException("--scores and --budget required")
        raw = json.loads(Path(scores_path).read_text(encoding="utf-8"))
        scores = [
            srl_mod.LuScore(s["lu_id"], s["tp"], s["fp"], s["fn"]) for s in raw["per_lu"]
        ]
        plan = srl_mod.plan_inverse_f1(scores, budget, seed=seed)
        manifest = srl_mod.Manifest(
            base_instance_ids=tuple(r.instance_id for r in records),
            regenerate_lus=plan.selected_lus,
        )
    else:  # low-resource
        pool = len(read_jsonl(generated_path)) if generated_path else None
        plan, manifest = srl_mod.plan_low_resource(
            records,
            base=base_fraction,
            aug=aug_fraction,
            source=srl_mod.AugSource(source),
            seed=seed,
            generated_pool_size=pool,
        )
    srl_mod.write_plan(output, plan, manifest)
    click.echo(json.dumps({"strategy": strategy, "output": str(output)}))


@main.command("emit-train")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--generated", "generated_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
def emit_train(manifest_path, corpus_path, generated_path, output):
    """Resolve a manifest into canonical training JSONL."""
    manifest = srl_mod.read_manifest(manifest_path)
    records = read_corpus_jsonl(corpus_path)
    generated = read_jsonl(generated_path) if generated_path else ()
    n = srl_mod.emit_training_data(manifest, records, output, generated=generated)
    click.echo(json.dumps({"records": n}))


@main.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--output-dir", default=None)
@click.option("--seed", type=int, default=None)
@click.option("--mode", type=click.Choice([m.value for m in ConditioningMode]), default=None)
@click.option("-n", "n", type=int, default=None)
def run_cmd(config_path, output_dir, seed, mode, n):
    """Run the full pipeline from a config file (flags override)."""
    import os

    overrides = {"output_dir": output_dir, "seed": seed, "mode": mode, "n": n}
    config = RunConfig.from_file(config_path, **overrides)
    for attr, env in (
        ("generator_url", GENERATOR_ENV),
        ("classifier_url", CLASSIFIER_ENV),
        ("scorer_url", SCORER_ENV),
    ):
        if getattr(config, attr) is None and os.environ.get(env):
            setattr(config, attr, os.environ[env])
    try:
        ledger = run_pipeline(config)
    except PipelineError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    click.echo(json.dumps({"output_dir": config.output_dir, "stages": ledger["stages"]}))


if __name__ == "__main__":
    main()
