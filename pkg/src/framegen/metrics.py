"""Intrinsic evaluation: reference overlap (ROUGE-1/L), corpus diversity
(self-BLEU), backend-delegated fluency scoring, human-review sheets, and the
aggregated run report.

ROUGE and BLEU share one tokenizer: lowercase, split on Unicode whitespace,
strip terminal punctuation from each token. BLEU n-gram precisions for n > 1
use add-one smoothing so short spans do not zero out the geometric mean.
"""
from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .genfilter import GenerationCandidate
from .lexicon import Lexicon

_TERMINAL_PUNCT = ".,;:!?\"'`)]}"


def tokenize(text: str) -> list[str]:
    out = []
    for tok in text.lower().split():
        tok = tok.rstrip(_TERMINAL_PUNCT)
        if tok:
            out.append(tok)
    return out


# -- ROUGE --------------------------------------------------------------------

def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _rouge1_pair(cand: list[str], ref: list[str]) -> float:
    overlap = sum((Counter(cand) & Counter(ref)).values())
    precision = overlap / len(cand) if cand else 0.0
    recall = overlap / len(ref)
    return _f1(precision, recall)


def _lcs_len(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def _rougel_pair(cand: list[str], ref: list[str]) -> float:
    lcs = _lcs_len(cand, ref)
    precision = lcs / len(cand) if cand else 0.0
    recall = lcs / len(ref)
    return _f1(precision, recall)


def rouge(candidate_fills: Sequence[str], reference_fills: Sequence[str]) -> dict:
    """Unigram-overlap F1 and LCS F1 between paired fills, averaged over the
    pairs of one instance."""
    if len(candidate_fills) != len(reference_fills):
        raise ValueError("candidate and reference fill lists differ in length")
    if not reference_fills:
        raise ValueError("empty reference fill list")
    r1_total = 0.0
    rl_total = 0.0
    for cand_text, ref_text in zip(candidate_fills, reference_fills):
        ref = tokenize(ref_text)
        if not ref:
            raise ValueError(f"reference fill {ref_text!r} has no tokens")
        cand = tokenize(cand_text)
        r1_total += _rouge1_pair(cand, ref)
        rl_total += _rougel_pair(cand, ref)
    n = len(candidate_fills)
    return {"rouge1": r1_total / n, "rougeL": rl_total / n}


# -- self-BLEU ------------------------------------------------------------------

def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: list[str], references: Sequence[list[str]], max_n: int = 4) -> float:
    """Corpus BLEU of one candidate against multiple references, with add-one
    smoothed precisions for n > 1 and the closest-reference brevity penalty
    (ties broken toward the shorter reference)."""
    if not candidate or not references:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand_counts = _ngram_counts(candidate, n)
        total = sum(cand_counts.values())
        max_ref: Counter = Counter()
        for ref in references:
            for ng, c in _ngram_counts(ref, n).items():
                if c > max_ref[ng]:
                    max_ref[ng] = c
        match = sum(min(c, max_ref.get(ng, 0)) for ng, c in cand_counts.items())
        if n == 1:
            if match == 0:
                return 0.0
            p = match / total
        else:
            p = (match + 1) / (total + 1)
        log_sum += math.log(p)
    c = len(candidate)
    r = min((len(ref) for ref in references), key=lambda L: (abs(L - c), L))
    bp = 1.0 if c > r else math.exp(1 - r / c)
    return bp * math.exp(log_sum / max_n)


def self_bleu(texts: Sequence[str], max_n: int = 4) -> float:
    """Mean BLEU of each text against all the others. Lower means more diverse.

    References are taken by list position, duplicates included: duplicating
    every text makes each text's own copy a reference and pushes the score to
    1.0. That multiplicity convention is intentional and pinned by tests.
    """
    if len(texts) < 2:
        raise ValueError("self-BLEU needs at least two texts")
    token_lists = [tokenize(t) for t in texts]
    total = 0.0
    for i, cand in enumerate(token_lists):
        refs = [toks for j, toks in enumerate(token_lists) if j != i]
        total += bleu(cand, refs, max_n=max_n)
    return total / len(texts)


# -- model-delegated scores -----------------------------------------------------

def perplexity(texts: Sequence[str], scorer_backend) -> float:
    """exp(total NLL / total tokens) with NLLs and token counts reported by the
    scorer backend."""
    if not texts:
        raise ValueError("no texts to score")
    items = scorer_backend.score_nll(texts)
    total_nll = sum(float(item["nll"]) for item in items)
    total_tokens = sum(int(item["token_count"]) for item in items)
    if total_tokens == 0:
        raise ValueError("scorer reported zero tokens")
    return math.exp(total_nll / total_tokens)


def bart_score(texts: Sequence[str], references: Sequence[str], scorer_backend) -> float:
    """Pass-through to the scorer's pairwise mode; mean item score."""
    if len(texts) != len(references):
        raise ValueError("texts and references differ in length")
    if not texts:
        raise ValueError("no texts to score")
    items = scorer_backend.score_pairwise(texts, references)
    return sum(float(item["score"]) for item in items) / len(items)


# -- human-review sheet -----------------------------------------------------------

REVIEW_SHEET_HEADER = (
    "frame",
    "lu_replacement",
    "sentence_with_markup",
    "original_fes",
    "generated_fes",
    "checkbox_coherence",
    "checkbox_fe_preservation",
)


def _markup_sentence(candidate: GenerationCandidate) -> str:
    """Candidate text with generated spans shown as <FeName> markers and the
    replacement LU wrapped in asterisks."""
    edits = [
        (slot.span, f"<{slot.name}>") for slot in candidate.fe_slots if slot.generated
    ]
    edits.extend((t, f"*{t.slice(candidate.text)}*") for t in candidate.target_spans)
    text = candidate.text
    for span, replacement in sorted(edits, key=lambda e: e[0].start, reverse=True):
        text = text[: span.start] + replacement + text[span.end :]
    return text


def emit_review_sheet(
    candidates: Sequence[GenerationCandidate],
    k: int,
    seed: int,
    path,
    lexicon: Lexicon | None = None,
) -> int:
    """Write a tab-separated review sheet of ``k`` seed-sampled rows with both
    judgment checkboxes empty. Returns the row count."""
    if k <= 0:
        raise ValueError("review sheet needs a positive sample size")
    if k > len(candidates):
        raise ValueError(f"cannot sample {k} rows from {len(candidates)} candidates")
    sample = random.Random(seed).sample(list(candidates), k)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(REVIEW_SHEET_HEADER) + "\n")
        for cand in sample:
            donor_label = cand.donor_id
            if lexicon is not None:
                try:
                    donor_label = lexicon.lu(int(cand.donor_id.rsplit(":", 1)[1])).label
                except Exception:
                    pass
            row = (
                cand.frame_name,
                f"{donor_label} ({cand.lu_label})",
                _markup_sentence(cand),
                " | ".join(cand.original_fills),
                " | ".join(cand.fills),
                "",
                "",
            )
            fh.write("\t".join(cell.replace("\t", " ") for cell in row) + "\n")
    return k


# -- aggregated report -------------------------------------------------------------

@dataclass(frozen=True)
class MetricsReport:
    n_before: int
    n_after: int
    fe_fidelity: float | None = None
    perplexity: float | None = None
    rouge1: float | None = None
    rougeL: float | None = None
    self_bleu: float | None = None
    bart_score: float | None = None

    def to_dict(self) -> dict:
        d = {"n_before": self.n_before, "n_after": self.n_after}
        for name in ("fe_fidelity", "perplexity", "rouge1", "rougeL", "self_bleu", "bart_score"):
            value = getattr(self, name)
            if value is not None:
                d[name] = value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def assemble_report(
    n_before: int,
    n_after: int,
    fe_fidelity: float | None = None,
    perplexity: float | None = None,
    rouge1: float | None = None,
    rougeL: float | None = None,
    self_bleu: float | None = None,
    bart_score: float | None = None,
) -> MetricsReport:
    """Bundle run metrics; metrics without a configured backend stay absent,
    never zero."""
    if n_after > n_before:
        raise ValueError(f"n_after {n_after} exceeds n_before {n_before}")
    for name, value, lo, hi in (
        ("fe_fidelity", fe_fidelity, 0.0, 1.0),
        ("rouge1", rouge1, 0.0, 1.0),
        ("rougeL", rougeL, 0.0, 1.0),
        ("self_bleu", self_bleu, 0.0, 1.0),
    ):
        if value is not None and not (lo <= value <= hi):
            raise ValueError(f"{name} {value} outside [{lo}, {hi}]")
    return MetricsReport(
        n_before=n_before,
        n_after=n_after,
        fe_fidelity=fe_fidelity,
        perplexity=perplexity,
        rouge1=rouge1,
        rougeL=rougeL,
        self_bleu=self_bleu,
        bart_score=bart_score,
    )
