"""Null models: deterministic, dependency-free implementations of the three
endpoints so protocol conformance can be tested without any model weights.

* generator: reconstructs the original span texts by matching the masked
  sentence against the corpus (identity behavior); falls back to fills derived
  from the FE names when no corpus sentence matches
* classifier: exact (frame, span text) lookup against gold annotations,
  "Not an FE" otherwise
* scorer: uniform language model over a fixed vocabulary
"""
from __future__ import annotations

import math
import re

from .corpus import CorpusIndex
from .schemas import (
    ClassifyRequest,
    ClassifyResponse,
    GenerateRequest,
    GenerateResponse,
    NOT_AN_FE,
    ScoreRequest,
    ScoreResponse,
)

MASK = "<mask>"

# tag-wrapped placeholders produced by FE / frame+FE conditioned surfaces
_FE_TAG = re.compile(r"<FE: [^<>]+> <mask> </FE: [^<>]+>")
_FRAME_FE_TAG = re.compile(r"<Frame: [^<>]+ \+ FE: [^<>]+> <mask> </Frame: [^<>]+ \+ FE: [^<>]+>")


def normalize_surface(surface: str) -> str:
    """Reduce any conditioning-tagged surface to bare ``<mask>`` placeholders."""
    surface = _FRAME_FE_TAG.sub(MASK, surface)
    surface = _FE_TAG.sub(MASK, surface)
    return surface


def _identity_fills(surface: str, texts) -> list[str] | None:
    """Fill placeholders by matching the masked sentence against corpus texts."""
    segments = surface.split(MASK)
    if len(segments) < 2:
        return None
    pattern = re.compile("(.+?)".join(re.escape(seg) for seg in segments), re.DOTALL)
    for text in texts:
        match = pattern.fullmatch(text)
        if match:
            return list(match.groups())
    return None


class NullGenerator:
    def __init__(self, index: CorpusIndex):
        self.index = index

    def generate(self, request: GenerateRequest) -> GenerateResponse:
        surface = normalize_surface(request.sentence_masked)
        texts = (
            self.index.texts_by_frame.get(request.frame, self.index.all_texts)
            if request.frame
            else self.index.all_texts
        )
        fills = _identity_fills(surface, texts)
        if fills is None:
            fills = [f"the {name.lower().replace('_', ' ')}" for name in request.fe_names]
        return GenerateResponse(
            candidates=[{"fills": list(fills)} for _ in range(request.n)],
            request_id=request.request_id,
        )


class NullClassifier:
    def __init__(self, index: CorpusIndex):
        self.index = index

    def classify(self, request: ClassifyRequest) -> ClassifyResponse:
        span_text = request.text[request.fe_span[0] : request.fe_span[1]]
        label = self.index.span_labels.get((request.frame, span_text), NOT_AN_FE)
        allowed = self.index.frame_fes.get(request.frame, set())
        if label != NOT_AN_FE and label not in allowed:
            label = NOT_AN_FE
        return ClassifyResponse(label=label, score=1.0, request_id=request.request_id)


class NullScorer:
    """Uniform token distribution: NLL is ``tokens * ln(vocab_size)``."""

    def __init__(self, vocab_size: int = 50_000):
        self.vocab_size = vocab_size

    def score(self, request: ScoreRequest) -> ScoreResponse:
        lv = math.log(self.vocab_size)
        if request.mode == "nll":
            items = [
                {"nll": len(t.split()) * lv, "token_count": len(t.split())}
                for t in request.texts
            ]
        else:
            items = [{"score": -len(ref.split()) * lv} for ref in request.references]
        return ScoreResponse(items=items, request_id=request.request_id)
