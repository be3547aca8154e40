"""Wrappers around off-the-shelf sequence models for the three endpoints.

These need model checkpoints on disk (or a reachable hub) and the ``hf``
extra installed; imports stay lazy so the null-model path never touches
torch/transformers. The classifier expects a sequence-classification
checkpoint whose labels are FE names plus "Not an FE" (see
scripts/train_span_classifier.py for the data recipe); its prediction is
constrained to the request frame's inventory by masking logits.
"""
from __future__ import annotations

import logging

from .schemas import (
    ClassifyRequest,
    ClassifyResponse,
    GenerateRequest,
    GenerateResponse,
    NOT_AN_FE,
    ScoreRequest,
    ScoreResponse,
)
from .traindata import encode_input

log = logging.getLogger(__name__)

_PROMPT_TAIL = (
    "Generate the spans that fill up the blanks ONLY. "
    "Separate the generated spans of different blanks by a comma."
)


def _require(model_id: str | None, endpoint: str) -> str:
    if not model_id:
        raise ValueError(f"hf mode needs a model id for {endpoint}")
    return model_id


def _prompt(request: GenerateRequest) -> str:
    parts = []
    if request.mode == "frame_fe" and request.frame:
        parts.append(f"Frame: {request.frame}.")
    parts.append(f"Lexical Unit: {request.lu}.")
    parts.append(f"Sentence: {request.sentence_masked}")
    if request.mode in ("fe", "frame_fe"):
        parts.append(f"FE Type: {', '.join(request.fe_names)}.")
    parts.append(_PROMPT_TAIL)
    return " ".join(parts)


def _parse_fills(text: str, expected: int) -> list[str] | None:
    fields = [f.strip() for f in text.split(",")]
    if len(fields) < expected:
        return None
    while len(fields) > expected:
        tail = fields.pop()
        fields[-1] = f"{fields[-1]}, {tail}"
    return fields


class HfGenerator:
    def __init__(self, model_id: str | None, device: str = "cpu"):
        from transformers import pipeline

        self.pipe = pipeline(
            "text2text-generation", model=_require(model_id, "generate"), device=device
        )

    def generate(self, request: GenerateRequest) -> GenerateResponse:
        import torch

        if request.decoding.seed is not None:
            torch.manual_seed(request.decoding.seed)
        outputs = self.pipe(
            _prompt(request),
            num_return_sequences=request.n,
            do_sample=request.decoding.temperature > 0,
            temperature=max(request.decoding.temperature, 1e-5),
            max_new_tokens=request.decoding.max_span_tokens * len(request.fe_names),
        )
        candidates = []
        for out in outputs:
            fills = _parse_fills(out["generated_text"], len(request.fe_names))
            if fills is not None:
                candidates.append({"fills": fills})
        return GenerateResponse(candidates=candidates, request_id=request.request_id)


class HfClassifier:
    def __init__(
        self, model_id: str | None, device: str = "cpu", frame_fes: dict | None = None
    ):
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        model_id = _require(model_id, "classify")
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForSequenceClassification.from_pretrained(model_id)
        self.model.to(device)
        self.model.eval()
        self.device = device
        self.frame_fes = frame_fes or {}
        self.label_ids = {
            label: idx for idx, label in self.model.config.id2label.items()
        }

    def classify(self, request: ClassifyRequest) -> ClassifyResponse:
        import torch

        encoded = encode_input(request.text, request.lu_span, request.fe_span, request.frame)
        inputs = self.tokenizer(
            encoded, return_tensors="pt", truncation=True
        ).to(self.device)
        with torch.no_grad():
            logits = self.model(**inputs).logits[0]
        allowed = self.frame_fes.get(request.frame)
        if allowed is not None:
            # constrain prediction to the frame's FE inventory plus NOT_AN_FE
            permitted = {
                idx
                for label, idx in self.label_ids.items()
                if label in allowed or label == NOT_AN_FE
            }
            if permitted:
                mask = torch.full_like(logits, float("-inf"))
                mask[list(permitted)] = 0.0
                logits = logits + mask
        probs = torch.softmax(logits, dim=-1)
        idx = int(torch.argmax(probs).item())
        label = self.model.config.id2label[idx]
        if allowed is not None and label != NOT_AN_FE and label not in allowed:
            label = NOT_AN_FE
        return ClassifyResponse(
            label=label,
            score=float(probs[idx].item()),
            request_id=request.request_id,
        )


class HfScorer:
    def __init__(self, model_id: str | None, device: str = "cpu"):
        from transformers import AutoModelForCausalLM, AutoTokenizer

        model_id = _require(model_id, "score")
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForCausalLM.from_pretrained(model_id)
        self.model.to(device)
        self.model.eval()
        self.device = device

    def _nll(self, text: str) -> tuple[float, int]:
        import torch

        ids = self.tokenizer(text, return_tensors="pt").input_ids.to(self.device)
        with torch.no_grad():
            out = self.model(ids, labels=ids)
        tokens = ids.shape[1] - 1  # shifted next-token targets
        return float(out.loss.item()) * tokens, tokens

    def score(self, request: ScoreRequest) -> ScoreResponse:
        if request.mode == "nll":
            items = []
            for text in request.texts:
                nll, tokens = self._nll(text)
                items.append({"nll": nll, "token_count": tokens})
        else:
            items = []
            for text, ref in zip(request.texts, request.references):
                nll, tokens = self._nll(f"{text} {self.tokenizer.eos_token or ''} {ref}")
                items.append({"score": -nll / max(tokens, 1)})
        return ScoreResponse(items=items, request_id=request.request_id)
