"""End-to-end run: ingest -> expand -> generate -> filter -> report, with a
deterministic run ledger.

Every artifact is written next to the ledger in the configured output
directory; stages write to ``<name>.partial`` and rename on completion, so a
crashed run leaves its partial files visible. Reruns with the same config and
mock backends are byte-identical (the ledger holds no wall-clock state).
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import random
from dataclasses import asdict, dataclass
from pathlib import Path

from .backends import (
    GoldLookupClassifier,
    HttpClassifierBackend,
    HttpGeneratorBackend,
    HttpScorerBackend,
    IdentityGenerator,
    RetryPolicy,
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
    GenerationCandidate,
    build_request,
    candidate_record,
    fe_fidelity,
    overgenerate,
    strict_filter,
)
from .lexicon import Pos, explode_fulltext, to_record
from .metrics import assemble_report, perplexity, rouge, self_bleu
from .release import load_release
from .relations import RelationGraph
from .util import map_bounded, write_jsonl

log = logging.getLogger(__name__)


class PipelineError(Exception):
    def __init__(self, stage: str, message: str, instance_id: str | None = None):
        detail = f"stage {stage!r} failed"
        if instance_id:
            detail += f" (instance {instance_id})"
        super().__init__(f"{detail}: {message}")
        self.stage = stage
        self.instance_id = instance_id


@dataclass
class RunConfig:
    release_dir: str
    output_dir: str
    seed: int
    split_config: str | None = None
    generator_url: str | None = None
    classifier_url: str | None = None
    scorer_url: str | None = None
    mode: str = "frame_fe"
    n: int = 1
    retry_attempts: int = 3
    concurrency: int = 4
    targets: list[str] | None = None  # LU labels like "reward.v"; None -> all eligible
    max_targets: int | None = None
    instances_per_target: int = 1
    temperature: float = 0.7
    max_span_tokens: int = 24
    all_pos: bool = False

    def resolved(self) -> dict:
        return dict(sorted(asdict(self).items()))

    def config_hash(self) -> str:
        canonical = json.dumps(self.resolved(), ensure_ascii=False, sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def from_file(cls, path, **overrides) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**raw)

    @property
    def conditioning_mode(self) -> ConditioningMode:
        return ConditioningMode(self.mode)

    @property
    def decoding(self) -> Decoding:
        return Decoding(
            temperature=self.temperature,
            max_span_tokens=self.max_span_tokens,
            seed=self.seed,
        )


def _atomic_jsonl(path: Path, dicts) -> int:
    partial = path.with_name(path.name + ".partial")
    n = write_jsonl(partial, dicts)
    os.replace(partial, path)
    return n


def _atomic_text(path: Path, text: str) -> None:
    partial = path.with_name(path.name + ".partial")
    partial.write_text(text, encoding="utf-8")
    os.replace(partial, path)


def _resolve_targets(config: RunConfig, lexicon):
    if config.targets:
        ids = []
        for label in config.targets:
            matches = lexicon.lus_labeled(label)
            if not matches:
                raise PipelineError("expand", f"no LU labeled {label!r}")
            ids.extend(lu.id for lu in matches)
        return sorted(set(ids))
    pos = None if config.all_pos else Pos.V
    ids = [lu.id for lu in expansion_targets(lexicon, pos=pos, annotated=False)]
    if config.max_targets is not None and len(ids) > config.max_targets:
        ids = sorted(random.Random(config.seed).sample(ids, config.max_targets))
    return ids


def _build_backends(config: RunConfig, lexicon, corpus):
    retry = RetryPolicy(attempts=config.retry_attempts)
    if config.generator_url:
        generator = HttpGeneratorBackend(config.generator_url, retry=retry)
    else:
        generator = IdentityGenerator()
    if config.classifier_url:
        classifier = HttpClassifierBackend(config.classifier_url, retry=retry)
    else:
        classifier = GoldLookupClassifier.from_sentences(explode_fulltext(corpus), lexicon)
    scorer = HttpScorerBackend(config.scorer_url, retry=retry) if config.scorer_url else None
    return generator, classifier, scorer


def run_pipeline(config: RunConfig) -> dict:
    """Execute all stages; returns the ledger dict (also written to
    ledger.json in the output directory)."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ledger: dict = {
        "config": config.resolved(),
        "config_hash": config.config_hash(),
        "stages": {},
        "backend_calls": {},
    }

    # stage 0: ingest
    try:
        lexicon, corpus = load_release(config.release_dir, config.split_config)
    except Exception as exc:
        raise PipelineError("ingest", str(exc)) from exc
    exploded = explode_fulltext(corpus)
    ledger["stages"]["ingest"] = {
        "frames": len(lexicon.frames),
        "fes": len(lexicon.fes),
        "lus": len(lexicon.lus),
        "instances": len(exploded),
    }

    graph = RelationGraph(lexicon)
    selector = CandidateSelector(lexicon, graph)
    generator, classifier, scorer = _build_backends(config, lexicon, corpus)

    # stage 1: expand (sister replacement + masking)
    try:
        target_ids = _resolve_targets(config, lexicon)
        donor_index = donors_by_lu(corpus)
        masked: list[MaskedInstance] = []
        for target in target_ids:
            masked.extend(
                expand_lu(
                    target,
                    lexicon,
                    graph,
                    donor_index,
                    selector,
                    config.conditioning_mode,
                    limit=config.instances_per_target,
                )
            )
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("expand", str(exc)) from exc
    _atomic_jsonl(out_dir / "masked.jsonl", (m.to_dict() for m in masked))
    ledger["stages"]["expand"] = {"targets": len(target_ids), "masked": len(masked)}

    # stage 2: generate
    try:

        def generate_for(instance: MaskedInstance) -> list[GenerationCandidate]:
            try:
                request = build_request(instance, n=config.n, decoding=config.decoding)
                return overgenerate(request, generator)
            except Exception as exc:
                raise PipelineError("generate", str(exc), instance_id=instance.donor_id) from exc

        candidate_lists = map_bounded(generate_for, masked, config.concurrency)
        candidates = [c for lst in candidate_lists for c in lst]
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("generate", str(exc)) from exc
    _atomic_jsonl(out_dir / "candidates.jsonl", (c.to_dict() for c in candidates))
    ledger["stages"]["generate"] = {
        "requests": len(masked),
        "candidates": len(candidates),
        "cap": config.n * len(masked),
    }

    # stage 3: strict filter
    try:
        result = strict_filter(candidates, classifier, lexicon, max_workers=config.concurrency)
    except Exception as exc:
        raise PipelineError("filter", str(exc)) from exc
    retained_records = [
        candidate_record(c, v.fidelity)
        for c, v in zip(candidates, result.verdicts)
        if v.passed
    ]
    _atomic_jsonl(out_dir / "retained.jsonl", retained_records)
    _atomic_jsonl(out_dir / "verdicts.jsonl", (v.to_dict() for v in result.verdicts))
    scored = [v for v in result.verdicts if v.per_span]
    pre_fidelity = fe_fidelity(scored) if scored else None
    ledger["stages"]["filter"] = {
        "candidates": len(candidates),
        "retained": len(result.retained),
        "unverifiable": result.n_unverifiable,
        "fe_fidelity_before": pre_fidelity,
    }

    # stage 4: metrics
    try:
        retained = result.retained
        rouge1 = rougeL = None
        if retained:
            r1_sum = rl_sum = 0.0
            for cand in retained:
                pair = rouge(list(cand.fills), list(cand.original_fills))
                r1_sum += pair["rouge1"]
                rl_sum += pair["rougeL"]
            rouge1 = r1_sum / len(retained)
            rougeL = rl_sum / len(retained)
        diversity = self_bleu([c.text for c in retained]) if len(retained) >= 2 else None
        ppl = perplexity([c.text for c in retained], scorer) if scorer and retained else None
        retained_verdicts = [v for v in result.verdicts if v.passed and v.per_span]
        report = assemble_report(
            n_before=len(candidates),
            n_after=len(retained),
            fe_fidelity=fe_fidelity(retained_verdicts) if retained_verdicts else None,
            perplexity=ppl,
            rouge1=rouge1,
            rougeL=rougeL,
            self_bleu=diversity,
        )
    except Exception as exc:
        raise PipelineError("metrics", str(exc)) from exc
    _atomic_text(out_dir / "report.json", report.to_json())

    for name, backend in (("generator", generator), ("classifier", classifier), ("scorer", scorer)):
        if backend is not None:
            ledger["backend_calls"][name] = getattr(backend, "calls", None)

    _atomic_text(
        out_dir / "ledger.json",
        json.dumps(ledger, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
    )
    return ledger


def dump_corpus(release_dir, split_config, out_path) -> dict:
    """Ingest a release and write the canonical exploded JSONL dump."""
    lexicon, corpus = load_release(release_dir, split_config)
    exploded = explode_fulltext(corpus)
    n = _atomic_jsonl(Path(out_path), (to_record(s, lexicon).to_dict() for s in exploded))
    return {
        "frames": len(lexicon.frames),
        "lus": len(lexicon.lus),
        "instances": n,
    }
