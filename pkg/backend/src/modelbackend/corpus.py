"""Reader for the canonical annotated-sentence JSONL dump.

The file format is the integration contract with the expansion toolkit: one
JSON object per line with text, frame, FE spans (character offsets, exclusive
end), and target spans. Lines holding a ``_header`` key are skipped.
"""
from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class CorpusIndex:
    """Lookup tables the null models need: gold span labels and per-frame FE
    inventories, plus the raw sentence texts grouped by frame."""

    span_labels: dict  # (frame, span text) -> FE name
    frame_fes: dict  # frame -> set of FE names
    texts_by_frame: dict  # frame -> list of sentence texts
    all_texts: list

    @classmethod
    def empty(cls) -> "CorpusIndex":
        return cls(span_labels={}, frame_fes={}, texts_by_frame={}, all_texts=[])


def load_corpus_index(path) -> CorpusIndex:
    span_labels: dict = {}
    frame_fes: dict = {}
    texts_by_frame: dict = {}
    all_texts: list = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "_header" in record:
                continue
            frame = record["frame"]
            text = record["text"]
            all_texts.append(text)
            texts_by_frame.setdefault(frame, []).append(text)
            fes = frame_fes.setdefault(frame, set())
            for fe in record.get("fes", ()):
                fes.add(fe["name"])
                span_labels.setdefault((frame, text[fe["start"] : fe["end"]]), fe["name"])
    return CorpusIndex(
        span_labels=span_labels,
        frame_fes=frame_fes,
        texts_by_frame=texts_by_frame,
        all_texts=all_texts,
    )
