"""Wire-protocol schemas for /generate, /classify, and /score.

Every request may carry a client request_id; every response echoes it.
"""
from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

NOT_AN_FE = "Not an FE"


class Decoding(BaseModel):
    temperature: float = 0.7
    max_span_tokens: int = Field(default=24, ge=1)
    seed: int | None = None


class GenerateRequest(BaseModel):
    mode: Literal["none", "fe", "frame_fe"]
    frame: str | None = None
    lu: str
    sentence_masked: str
    fe_names: list[str] = Field(min_length=1)
    n: int = Field(ge=1)
    decoding: Decoding = Decoding()
    request_id: str | None = None

    @model_validator(mode="after")
    def _mask_count_matches(self):
        masks = self.sentence_masked.count("<mask>")
        if masks != len(self.fe_names):
            raise ValueError(
                f"sentence_masked holds {masks} placeholders for {len(self.fe_names)} fe_names"
            )
        return self


class CandidateFills(BaseModel):
    fills: list[str]


class GenerateResponse(BaseModel):
    candidates: list[CandidateFills]
    request_id: str | None = None


class ClassifyRequest(BaseModel):
    text: str
    frame: str
    lu_span: tuple[int, int]
    fe_span: tuple[int, int]
    request_id: str | None = None

    @model_validator(mode="after")
    def _spans_in_bounds(self):
        for name in ("lu_span", "fe_span"):
            start, end = getattr(self, name)
            if not (0 <= start < end <= len(self.text)):
                raise ValueError(f"{name} [{start}, {end}) outside text bounds")
        return self


class ClassifyResponse(BaseModel):
    label: str
    score: float = Field(ge=0.0, le=1.0)
    request_id: str | None = None


class ScoreRequest(BaseModel):
    texts: list[str] = Field(min_length=1)
    mode: Literal["nll", "pairwise"]
    references: list[str] | None = None
    request_id: str | None = None

    @model_validator(mode="after")
    def _references_for_pairwise(self):
        if self.mode == "pairwise":
            if self.references is None or len(self.references) != len(self.texts):
                raise ValueError("pairwise mode needs references matching texts in length")
        return self


class NllItem(BaseModel):
    nll: float
    token_count: int


class PairwiseItem(BaseModel):
    score: float


class ScoreResponse(BaseModel):
    items: list[NllItem] | list[PairwiseItem]
    request_id: str | None = None
