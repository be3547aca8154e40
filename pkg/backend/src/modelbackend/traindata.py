"""Training-data builder for the span-type classifier.

One instance per FE span: the sentence with <LU_START>/<LU_END> around the
LU token and <FE_START>/<FE_END> around the queried span, frame name appended
at the end. Negative instances over random non-gold word spans, labeled
"Not an FE", make up roughly a configurable tenth of the output.
"""
from __future__ import annotations

import json
import random

from .schemas import NOT_AN_FE


def encode_input(text: str, lu_span, fe_span, frame: str) -> str:
    marks = sorted(
        [
            (lu_span[0], 1, "<LU_START> "),
            (lu_span[1], 0, " <LU_END>"),
            (fe_span[0], 1, "<FE_START> "),
            (fe_span[1], 0, " <FE_END>"),
        ],
        key=lambda m: (m[0], m[1]),
        reverse=True,
    )
    for pos, _, marker in marks:
        text = text[:pos] + marker + text[pos:]
    return f"{text} {frame}"


def _word_spans(text: str) -> list[tuple[int, int]]:
    spans = []
    pos = 0
    for word in text.split():
        start = text.index(word, pos)
        spans.append((start, start + len(word)))
        pos = start + len(word)
    return spans


def _random_negative_span(text: str, gold: set, rng: random.Random) -> tuple[int, int] | None:
    words = _word_spans(text)
    if not words:
        return None
    for _ in range(20):
        i = rng.randrange(len(words))
        j = min(len(words) - 1, i + rng.randrange(3))
        span = (words[i][0], words[j][1])
        if span not in gold:
            return span
    return None


def build_classifier_training(
    records: list[dict], negative_fraction: float = 0.1, seed: int = 0
) -> list[dict]:
    """Instances of {"input", "label"} from canonical sentence records. The
    negative share is of the final dataset, so n_neg ~= f/(1-f) * n_pos."""
    if not (0.0 <= negative_fraction < 1.0):
        raise ValueError("negative fraction must be in [0, 1)")
    rng = random.Random(seed)
    positives: list[dict] = []
    eligible: list[dict] = []
    for record in records:
        if not record.get("targets"):
            continue
        lu_span = tuple(record["targets"][0])
        gold = {(fe["start"], fe["end"]) for fe in record.get("fes", ())}
        for fe in record.get("fes", ()):
            positives.append(
                {
                    "input": encode_input(
                        record["text"], lu_span, (fe["start"], fe["end"]), record["frame"]
                    ),
                    "label": fe["name"],
                }
            )
        eligible.append(record)

    n_neg = round(len(positives) * negative_fraction / (1.0 - negative_fraction))
    negatives: list[dict] = []
    attempts = 0
    while len(negatives) < n_neg and attempts < n_neg * 50 and eligible:
        attempts += 1
        record = eligible[rng.randrange(len(eligible))]
        gold = {(fe["start"], fe["end"]) for fe in record.get("fes", ())}
        span = _random_negative_span(record["text"], gold, rng)
        if span is None:
            continue
        negatives.append(
            {
                "input": encode_input(
                    record["text"], tuple(record["targets"][0]), span, record["frame"]
                ),
                "label": NOT_AN_FE,
            }
        )
    out = positives + negatives
    rng.shuffle(out)
    return out


def write_training_jsonl(path, instances: list[dict]) -> int:
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(json.dumps(inst, ensure_ascii=False) + "\n")
    return len(instances)
