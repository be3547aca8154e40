"""Frame-SRL span scoring and training-data augmentation planning.

Scoring is exact-match: a predicted span counts only when both its character
offsets and FE name equal a gold span of the same (sentence, LU) instance.
Plans are seed-deterministic and emitted as JSON manifests listing sentence
ids and generation ids.
"""
from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .lexicon import FeRecord, Lexicon, LuId, Pos, SentenceRecord, Span

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PredictedFe:
    name: str
    span: Span


@dataclass(frozen=True)
class SrlPrediction:
    sentence_id: int
    lu: LuId
    predicted_fes: tuple[PredictedFe, ...]
    frame: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "SrlPrediction":
        return cls(
            sentence_id=d["sentence_id"],
            lu=d["lu_id"],
            predicted_fes=tuple(
                PredictedFe(f["name"], Span(f["start"], f["end"])) for f in d["fes"]
            ),
            frame=d.get("frame"),
        )

    def to_dict(self) -> dict:
        d = {
            "sentence_id": self.sentence_id,
            "lu_id": self.lu,
            "fes": [
                {"name": f.name, "start": f.span.start, "end": f.span.end}
                for f in self.predicted_fes
            ],
        }
        if self.frame is not None:
            d["frame"] = self.frame
        return d


@dataclass(frozen=True)
class LuScore:
    lu: LuId
    tp: int
    fp: int
    fn: int

    @property
    def f1(self) -> float:
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if denom else 0.0


@dataclass(frozen=True)
class SrlScore:
    precision: float
    recall: float
    f1: float
    per_lu: tuple[LuScore, ...]

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_lu": [
                {"lu_id": s.lu, "tp": s.tp, "fp": s.fp, "fn": s.fn, "f1": s.f1}
                for s in self.per_lu
            ],
        }


def score_srl(gold: Sequence[SentenceRecord], predictions: Sequence[SrlPrediction]) -> SrlScore:
    """Micro P/R/F1 over spans plus per-LU aggregates. Zero denominators score
    0 by convention."""
    gold_map: dict[tuple[int, int], set] = {}
    lu_of: dict[tuple[int, int], int] = {}
    for rec in gold:
        key = (rec.sentence_id, rec.lu_id)
        if key in gold_map:
            raise ValueError(f"duplicate gold instance {rec.instance_id}")
        gold_map[key] = {(f.name, f.start, f.end) for f in rec.fes}
        lu_of[key] = rec.lu_id

    pred_map: dict[tuple[int, int], set] = {}
    for pred in predictions:
        key = (pred.sentence_id, pred.lu)
        if key not in gold_map:
            raise ValueError(
                f"prediction references unknown instance {pred.sentence_id}:{pred.lu}"
            )
        if key in pred_map:
            raise ValueError(f"duplicate prediction for instance {pred.sentence_id}:{pred.lu}")
        pred_map[key] = {
            (f.name, f.span.start, f.span.end) for f in pred.predicted_fes
        }

    per_lu: dict[int, list[int]] = {}
    total_tp = total_fp = total_fn = 0
    for key, gold_spans in gold_map.items():
        pred_spans = pred_map.get(key, set())
        tp = len(gold_spans & pred_spans)
        fp = len(pred_spans - gold_spans)
        fn = len(gold_spans - pred_spans)
        total_tp += tp
        total_fp += fp
        total_fn += fn
        acc = per_lu.setdefault(lu_of[key], [0, 0, 0])
        acc[0] += tp
        acc[1] += fp
        acc[2] += fn

    precision = total_tp / (total_tp + total_fp) if total_tp + total_fp else 0.0
    recall = total_tp / (total_tp + total_fn) if total_tp + total_fn else 0.0
    denom = 2 * total_tp + total_fp + total_fn
    f1 = 2 * total_tp / denom if denom else 0.0
    return SrlScore(
        precision=precision,
        recall=recall,
        f1=f1,
        per_lu=tuple(
            LuScore(lu, tp, fp, fn) for lu, (tp, fp, fn) in sorted(per_lu.items())
        ),
    )


def select_oracle_lus(
    scores: Iterable[LuScore],
    lexicon: Lexicon,
    threshold: float = 0.75,
    pos: Pos = Pos.V,
) -> set[LuId]:
    """LUs of the given POS scoring strictly below the threshold."""
    return {
        s.lu for s in scores if lexicon.lu(s.lu).pos is pos and s.f1 < threshold
    }


# -- augmentation plans ----------------------------------------------------------

class Strategy(Enum):
    ORACLE_THRESHOLD = "oracle_threshold"
    NON_ORACLE_REMOVAL = "non_oracle_removal"
    INVERSE_F1_WEIGHTED = "inverse_f1_weighted"
    LOW_RESOURCE = "low_resource"


class AugSource(Enum):
    GENERATED = "generated"
    HUMAN_HELD_OUT = "human_held_out"


@dataclass(frozen=True)
class AugmentationPlan:
    strategy: Strategy
    selected_lus: tuple[LuId, ...]
    base_fraction: float
    aug_fraction: float
    seed: int
    aug_counts: dict | None = None

    def __post_init__(self) -> None:
        for name, frac in (("base_fraction", self.base_fraction), ("aug_fraction", self.aug_fraction)):
            if not (0.0 <= frac <= 1.0):
                raise ValueError(f"{name} {frac} outside [0, 1]")

    def to_dict(self) -> dict:
        d = {
            "strategy": self.strategy.value,
            "selected_lus": list(self.selected_lus),
            "base_fraction": self.base_fraction,
            "aug_fraction": self.aug_fraction,
            "seed": self.seed,
        }
        if self.aug_counts is not None:
            d["aug_counts"] = {str(k): v for k, v in sorted(self.aug_counts.items())}
        return d


@dataclass(frozen=True)
class Manifest:
    """Resolvable dataset listing: instance/sentence ids of human data plus
    line indices into a generated pool."""

    base_instance_ids: tuple[str, ...] = ()
    base_sentence_ids: tuple[int, ...] = ()
    aug_sentence_ids: tuple[int, ...] = ()
    aug_generation_ids: tuple[int, ...] = ()
    regenerate_lus: tuple[LuId, ...] = ()

    def to_dict(self) -> dict:
        return {
            "base_instance_ids": list(self.base_instance_ids),
            "base_sentence_ids": list(self.base_sentence_ids),
            "aug_sentence_ids": list(self.aug_sentence_ids),
            "aug_generation_ids": list(self.aug_generation_ids),
            "regenerate_lus": list(self.regenerate_lus),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Manifest":
        return cls(
            base_instance_ids=tuple(d.get("base_instance_ids", ())),
            base_sentence_ids=tuple(d.get("base_sentence_ids", ())),
            aug_sentence_ids=tuple(d.get("aug_sentence_ids", ())),
            aug_generation_ids=tuple(d.get("aug_generation_ids", ())),
            regenerate_lus=tuple(d.get("regenerate_lus", ())),
        )


def write_plan(path, plan: AugmentationPlan, manifest: Manifest) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(
            {"plan": plan.to_dict(), "manifest": manifest.to_dict()},
            fh,
            ensure_ascii=False,
            sort_keys=True,
            indent=2,
        )
        fh.write("\n")


def read_manifest(path) -> Manifest:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return Manifest.from_dict(raw.get("manifest", raw))


def allocate_largest_remainder(weights: Sequence[float], budget: int) -> list[int]:
    """Integer allocation proportional to weights, summing exactly to budget
    (all zeros when the weights sum to zero or the budget is non-positive)."""
    total = float(sum(weights))
    if budget <= 0 or total <= 0:
        return [0] * len(weights)
    quotas = [budget * w / total for w in weights]
    counts = [math.floor(q) for q in quotas]
    remaining = budget - sum(counts)
    by_fraction = sorted(
        range(len(weights)), key=lambda i: (-(quotas[i] - counts[i]), i)
    )
    for i in by_fraction[:remaining]:
        counts[i] += 1
    return counts


def plan_non_oracle_removal(
    records: Sequence[SentenceRecord],
    lexicon: Lexicon,
    k: int = 150,
    pos: Pos = Pos.V,
    seed: int = 0,
) -> tuple[AugmentationPlan, Manifest]:
    """Remove every instance of k randomly chosen annotated LUs of the given
    POS from the training records; those LUs become regeneration targets."""
    eligible = sorted({rec.lu_id for rec in records if lexicon.lu(rec.lu_id).pos is pos})
    if len(eligible) < k:
        raise ValueError(f"only {len(eligible)} eligible LUs for k={k}")
    selected = sorted(random.Random(seed).sample(eligible, k)) if k else []
    removed = set(selected)
    base_ids = tuple(rec.instance_id for rec in records if rec.lu_id not in removed)
    plan = AugmentationPlan(
        strategy=Strategy.NON_ORACLE_REMOVAL,
        selected_lus=tuple(selected),
        base_fraction=1.0,
        aug_fraction=0.0,
        seed=seed,
    )
    return plan, Manifest(base_instance_ids=base_ids, regenerate_lus=tuple(selected))


def plan_inverse_f1(
    scores: Sequence[LuScore], budget: int, seed: int = 0
) -> AugmentationPlan:
    """Per-LU augmentation counts proportional to (1 - F1), allocated by
    largest remainder so they sum exactly to the budget. Every LU is eligible."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    ordered = sorted(scores, key=lambda s: s.lu)
    weights = [max(0.0, 1.0 - s.f1) for s in ordered]
    counts = allocate_largest_remainder(weights, budget)
    aug_counts = {s.lu: c for s, c in zip(ordered, counts)}
    return AugmentationPlan(
        strategy=Strategy.INVERSE_F1_WEIGHTED,
        selected_lus=tuple(s.lu for s, c in zip(ordered, counts) if c > 0),
        base_fraction=1.0,
        aug_fraction=0.0,
        seed=seed,
        aug_counts=aug_counts,
    )


def plan_low_resource(
    records: Sequence[SentenceRecord],
    base: float = 0.25,
    aug: float = 0.0625,
    source: AugSource = AugSource.GENERATED,
    seed: int = 0,
    generated_pool_size: int | None = None,
) -> tuple[AugmentationPlan, Manifest]:
    """Sample a base fraction of the training sentences plus an augmentation
    fraction drawn either from a generated pool or from held-out human
    sentences disjoint from the base sample. Sampling is by sentence, so a
    fulltext sentence carries all its LU instances together."""
    if source is AugSource.HUMAN_HELD_OUT and base + aug > 1.0:
        raise ValueError("base + aug fractions exceed 1 for held-out human augmentation")
    sentence_ids = sorted({rec.sentence_id for rec in records})
    n = len(sentence_ids)
    n_base = round(base * n)
    n_aug = round(aug * n)
    rng = random.Random(seed)
    base_ids = sorted(rng.sample(sentence_ids, n_base))

    aug_sentence_ids: tuple[int, ...] = ()
    aug_generation_ids: tuple[int, ...] = ()
    if n_aug:
        if source is AugSource.HUMAN_HELD_OUT:
            pool = [s for s in sentence_ids if s not in set(base_ids)]
            if len(pool) < n_aug:
                raise ValueError(f"held-out pool of {len(pool)} sentences < {n_aug} needed")
            aug_sentence_ids = tuple(sorted(rng.sample(pool, n_aug)))
        else:
            if generated_pool_size is None or generated_pool_size < n_aug:
                raise ValueError(
                    f"generated pool of {generated_pool_size} records < {n_aug} needed"
                )
            aug_generation_ids = tuple(sorted(rng.sample(range(generated_pool_size), n_aug)))

    plan = AugmentationPlan(
        strategy=Strategy.LOW_RESOURCE,
        selected_lus=(),
        base_fraction=base,
        aug_fraction=aug,
        seed=seed,
    )
    manifest = Manifest(
        base_sentence_ids=tuple(base_ids),
        aug_sentence_ids=aug_sentence_ids,
        aug_generation_ids=aug_generation_ids,
    )
    return plan, manifest


# -- training-data emission ---------------------------------------------------------

GENERATED_SENTENCE_ID_BASE = 1_000_000_000


def generation_record_to_sentence(d: dict, index: int) -> SentenceRecord:
    """Adapt a retained-generation JSONL record to the canonical sentence
    schema, keeping its provenance."""
    lemma, _, pos = d["lu"].rpartition(".")
    provenance = dict(d.get("provenance", {}))
    return SentenceRecord(
        sentence_id=GENERATED_SENTENCE_ID_BASE + index,
        text=d["text"],
        lu_id=provenance.get("lu_id", -1),
        frame=d["frame"],
        lemma=lemma,
        pos=pos,
        targets=tuple((s, e) for s, e in d["targets"]),
        fes=tuple(
            FeRecord(f["name"], f["start"], f["end"], f.get("phrase_type", ""))
            for f in d["fes"]
        ),
        source="generated",
        split="train",
        provenance=provenance,
    )


def emit_training_data(
    manifest: Manifest,
    records: Sequence[SentenceRecord],
    path,
    generated: Sequence[dict] = (),
) -> int:
    """Resolve a manifest against corpus records (plus a generated pool) and
    write the result in the canonical JSONL schema behind a header sentinel.
    Returns the record count (header excluded)."""
    by_instance = {rec.instance_id: rec for rec in records}
    by_sentence: dict[int, list[SentenceRecord]] = {}
    for rec in records:
        by_sentence.setdefault(rec.sentence_id, []).append(rec)

    out: list[SentenceRecord] = []
    for iid in manifest.base_instance_ids:
        if iid not in by_instance:
            raise ValueError(f"manifest references unknown instance id {iid}")
        out.append(by_instance[iid])
    for sid in manifest.base_sentence_ids:
        if sid not in by_sentence:
            raise ValueError(f"manifest references unknown sentence id {sid}")
        out.extend(by_sentence[sid])
    for sid in manifest.aug_sentence_ids:
        if sid not in by_sentence:
            raise ValueError(f"manifest references unknown sentence id {sid}")
        out.extend(by_sentence[sid])
    for gid in manifest.aug_generation_ids:
        if not (0 <= gid < len(generated)):
            raise ValueError(f"manifest references unknown generation id {gid}")
        out.append(generation_record_to_sentence(generated[gid], gid))

    with open(path, "w", encoding="utf-8") as fh:
        header = {"_header": {"schema": "annotated-sentence/v1", "count": len(out)}}
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for rec in out:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")
    return len(out)


def identity_manifest(records: Sequence[SentenceRecord]) -> Manifest:
    """Manifest covering every record as-is."""
    return Manifest(base_instance_ids=tuple(rec.instance_id for rec in records))
