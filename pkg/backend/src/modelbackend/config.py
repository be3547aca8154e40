"""Service configuration."""
from __future__ import annotations

from dataclasses import dataclass, field

ALL_ENDPOINTS = ("generate", "classify", "score")


@dataclass
class BackendConfig:
    endpoints: tuple[str, ...] = ALL_ENDPOINTS
    mode: str = "null"  # "null" | "hf"
    corpus_path: str | None = None  # canonical JSONL dump for the null models
    generator_model: str | None = None
    classifier_model: str | None = None
    scorer_model: str | None = None
    device: str = "cpu"
    max_batch_size: int = 8
    vocab_size: int = 50_000

    def __post_init__(self) -> None:
        unknown = set(self.endpoints) - set(ALL_ENDPOINTS)
        if unknown:
            raise ValueError(f"unknown endpoints: {sorted(unknown)}")
        if self.mode not in ("null", "hf"):
            raise ValueError(f"unknown mode {self.mode!r}")
