"""Immutable lexical database: frames, frame elements, lexical units, annotated sentences.

Character offsets throughout are 0-based Unicode code-point indices with
exclusive ends, regardless of how the source files encode them.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

log = logging.getLogger(__name__)

FrameId = int
FeId = int
LuId = int
DocId = int


class LexiconError(Exception):
    """Raised for unknown ids, dangling cross-references, or bad lookups."""


class Coreness(Enum):
    CORE = "Core"
    CORE_UNEXPRESSED = "Core-Unexpressed"
    PERIPHERAL = "Peripheral"
    EXTRA_THEMATIC = "Extra-Thematic"

    @classmethod
    def parse(cls, raw: str) -> "Coreness":
        for member in cls:
            if member.value == raw:
                return member
        raise LexiconError(f"unknown coreness value {raw!r}")


class Pos(Enum):
    V = "v"
    N = "n"
    A = "a"
    ADV = "adv"
    PREP = "prep"
    SCON = "scon"
    NUM = "num"
    ART = "art"
    IDIO = "idio"
    C = "c"

    @classmethod
    def parse(cls, raw: str) -> "Pos":
        try:
            return cls(raw.lower())
        except ValueError:
            raise LexiconError(f"unknown POS tag {raw!r}") from None


class Source(Enum):
    FULLTEXT = "fulltext"
    LEXICOGRAPHIC = "lexicographic"


class Split(Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"
    UNASSIGNED = "unassigned"


@dataclass(frozen=True, order=True)
class Span:
    """Half-open character interval [start, end)."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def shift(self, delta: int) -> "Span":
        return Span(self.start + delta, self.end + delta)

    def slice(self, text: str) -> str:
        return text[self.start : self.end]


@dataclass(frozen=True)
class FeSpan:
    fe: FeId
    span: Span
    phrase_type: str
    grammatical_function: str | None = None


@dataclass(frozen=True)
class Frame:
    id: FrameId
    name: str
    definition: str
    fes: tuple[FeId, ...]


@dataclass(frozen=True)
class FrameElement:
    id: FeId
    frame: FrameId
    name: str
    coreness: Coreness
    definition: str


@dataclass(frozen=True)
class LexicalUnit:
    id: LuId
    frame: FrameId
    lemma: str
    pos: Pos
    has_annotations: bool
    annotation_count: int = 0

    @property
    def label(self) -> str:
        """Lemma.pos form, e.g. ``reward.v``."""
        return f"{self.lemma}.{self.pos.value}"


@dataclass(frozen=True)
class AnnotatedSentence:
    """One sentence annotated for exactly one lexical unit."""

    sentence_id: int
    text: str
    lu: LuId
    target_spans: tuple[Span, ...]
    fe_spans: tuple[FeSpan, ...]
    source: Source
    doc: DocId | None = None
    split: Split = Split.UNASSIGNED

    @property
    def instance_id(self) -> str:
        return f"{self.sentence_id}:{self.lu}"

    def validate(self) -> None:
        """Raise ValueError if any span invariant is broken."""
        n = len(self.text)
        if not self.target_spans:
            raise ValueError("sentence has no target span")
        for sp in self.target_spans:
            if sp.end > n:
                raise ValueError(f"target span {sp} outside text of length {n}")
        for fs in self.fe_spans:
            if fs.span.end > n:
                raise ValueError(f"FE span {fs.span} outside text of length {n}")
        ordered = sorted(self.fe_spans, key=lambda f: f.span)
        for a, b in zip(ordered, ordered[1:]):
            if a.span.overlaps(b.span):
                raise ValueError(f"overlapping FE spans {a.span} and {b.span}")
        targets = sorted(self.target_spans)
        for a, b in zip(targets, targets[1:]):
            if a.overlaps(b):
                raise ValueError(f"overlapping target spans {a} and {b}")


@dataclass(frozen=True)
class LuAnnotation:
    """One LU's annotation layer on a fulltext sentence."""

    lu: LuId
    target_spans: tuple[Span, ...]
    fe_spans: tuple[FeSpan, ...]


@dataclass(frozen=True)
class FulltextSentence:
    sentence_id: int
    doc: DocId
    text: str
    annotations: tuple[LuAnnotation, ...]
    split: Split = Split.UNASSIGNED


@dataclass
class Corpus:
    """All annotated sentences of a release: per-LU lexicographic records plus
    fulltext sentences that may carry several LU annotation layers each."""

    lexicographic: list[AnnotatedSentence] = field(default_factory=list)
    fulltext: list[FulltextSentence] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.lexicographic) + len(self.fulltext)


class Lexicon:
    """Frames, FEs and LUs indexed by id and by name. Immutable after construction."""

    def __init__(
        self,
        frames: Iterable[Frame],
        fes: Iterable[FrameElement],
        lus: Iterable[LexicalUnit],
        frame_relations: Sequence = (),
    ) -> None:
        self.frames: dict[FrameId, Frame] = {f.id: f for f in frames}
        self.fes: dict[FeId, FrameElement] = {fe.id: fe for fe in fes}
        self.lus: dict[LuId, LexicalUnit] = {lu.id: lu for lu in lus}
        self.frame_relations = tuple(frame_relations)

        self.frames_by_name: dict[str, Frame] = {}
        for f in self.frames.values():
            if f.name in self.frames_by_name:
                raise LexiconError(f"duplicate frame name {f.name!r}")
            self.frames_by_name[f.name] = f

        self._fe_by_frame_name: dict[tuple[FrameId, str], FrameElement] = {}
        for fe in self.fes.values():
            key = (fe.frame, fe.name)
            if key in self._fe_by_frame_name:
                raise LexiconError(f"duplicate FE name {fe.name!r} in frame {fe.frame}")
            self._fe_by_frame_name[key] = fe

        self._lu_by_key: dict[tuple[str, Pos, FrameId], LexicalUnit] = {}
        self._lus_by_label: dict[str, list[LexicalUnit]] = {}
        for lu in self.lus.values():
            key = (lu.lemma, lu.pos, lu.frame)
            if key in self._lu_by_key:
                raise LexiconError(f"duplicate LU {lu.lemma}.{lu.pos.value} in frame {lu.frame}")
            self._lu_by_key[key] = lu
            self._lus_by_label.setdefault(lu.label, []).append(lu)

        # every cross-reference must resolve
        for fe in self.fes.values():
            if fe.frame not in self.frames:
                raise LexiconError(f"FE {fe.id} references unknown frame {fe.frame}")
        for lu in self.lus.values():
            if lu.frame not in self.frames:
                raise LexiconError(f"LU {lu.id} references unknown frame {lu.frame}")
        for f in self.frames.values():
            for fe_id in f.fes:
                if fe_id not in self.fes:
                    raise LexiconError(f"frame {f.id} references unknown FE {fe_id}")

    # -- total lookups ---------------------------------------------------
    def frame(self, frame_id: FrameId) -> Frame:
        try:
            return self.frames[frame_id]
        except KeyError:
            raise LexiconError(f"unknown frame id {frame_id}") from None

    def fe(self, fe_id: FeId) -> FrameElement:
        try:
            return self.fes[fe_id]
        except KeyError:
            raise LexiconError(f"unknown FE id {fe_id}") from None

    def lu(self, lu_id: LuId) -> LexicalUnit:
        try:
            return self.lus[lu_id]
        except KeyError:
            raise LexiconError(f"unknown LU id {lu_id}") from None

    def frame_named(self, name: str) -> Frame:
        try:
            return self.frames_by_name[name]
        except KeyError:
            raise LexiconError(f"unknown frame name {name!r}") from None

    def fe_named(self, frame_id: FrameId, name: str) -> FrameElement:
        try:
            return self._fe_by_frame_name[(frame_id, name)]
        except KeyError:
            raise LexiconError(f"frame {frame_id} has no FE named {name!r}") from None

    def lus_labeled(self, label: str) -> list[LexicalUnit]:
        """All LUs with a given ``lemma.pos`` label (may span several frames)."""
        return list(self._lus_by_label.get(label, []))

    def frame_of_lu(self, lu_id: LuId) -> Frame:
        return self.frame(self.lu(lu_id).frame)

    def fe_names(self, frame_id: FrameId) -> set[str]:
        return {self.fe(fe_id).name for fe_id in self.frame(frame_id).fes}

    def frame_lus(self, frame_id: FrameId) -> list[LexicalUnit]:
        return [lu for lu in self.lus.values() if lu.frame == frame_id]


# -- corpus operations ----------------------------------------------------

def explode_fulltext(corpus: Corpus) -> list[AnnotatedSentence]:
    """Flatten to single-LU records: a fulltext sentence with k annotated LUs
    becomes k records sharing its text; lexicographic records pass through."""
    out: list[AnnotatedSentence] = list(corpus.lexicographic)
    for sent in corpus.fulltext:
        for ann in sent.annotations:
            out.append(
                AnnotatedSentence(
                    sentence_id=sent.sentence_id,
                    text=sent.text,
                    lu=ann.lu,
                    target_spans=ann.target_spans,
                    fe_spans=ann.fe_spans,
                    source=Source.FULLTEXT,
                    doc=sent.doc,
                    split=sent.split,
                )
            )
    return out


@dataclass(frozen=True)
class CoverageReport:
    total_lus: int
    annotated_lus: int
    fraction: float | None  # None when the lexicon holds no LUs


def coverage_report(lexicon: Lexicon) -> CoverageReport:
    total = len(lexicon.lus)
    annotated = sum(1 for lu in lexicon.lus.values() if lu.has_annotations)
    fraction = annotated / total if total else None
    return CoverageReport(total_lus=total, annotated_lus=annotated, fraction=fraction)


@dataclass(frozen=True)
class PosRow:
    instances: int
    avg_fes: float
    avg_core_fes: float
    avg_candidate_fes: float


def pos_stats(
    lexicon: Lexicon,
    corpus: Corpus,
    selector: Callable[[AnnotatedSentence], Sequence[FeSpan]],
    core_includes_unexpressed: bool = False,
) -> dict[Pos, PosRow]:
    """Per-POS instance counts and mean FE / core-FE / candidate-FE spans per
    sentence, over the exploded corpus. ``selector`` decides candidacy."""
    core_values = {Coreness.CORE}
    if core_includes_unexpressed:
        core_values.add(Coreness.CORE_UNEXPRESSED)

    totals: dict[Pos, list[int]] = {}
    for sent in explode_fulltext(corpus):
        pos = lexicon.lu(sent.lu).pos
        acc = totals.setdefault(pos, [0, 0, 0, 0])
        acc[0] += 1
        acc[1] += len(sent.fe_spans)
        acc[2] += sum(1 for fs in sent.fe_spans if lexicon.fe(fs.fe).coreness in core_values)
        acc[3] += len(selector(sent))
    return {
        pos: PosRow(
            instances=n,
            avg_fes=fes / n,
            avg_core_fes=core / n,
            avg_candidate_fes=cand / n,
        )
        for pos, (n, fes, core, cand) in totals.items()
    }


def split_sizes(corpus: Corpus) -> dict[str, int]:
    """Instance counts per split over the exploded corpus, with a separate
    fulltext-only train count."""
    sizes = {
        "train": 0,
        "train_fulltext": 0,
        "dev": 0,
        "test": 0,
        "unassigned": 0,
    }
    for sent in explode_fulltext(corpus):
        sizes[sent.split.value] += 1
        if sent.split is Split.TRAIN and sent.source is Source.FULLTEXT:
            sizes["train_fulltext"] += 1
    return sizes


# -- canonical JSONL sentence records --------------------------------------

@dataclass(frozen=True)
class FeRecord:
    name: str
    start: int
    end: int
    phrase_type: str


@dataclass(frozen=True)
class SentenceRecord:
    """One line of the canonical JSONL corpus dump."""

    sentence_id: int
    text: str
    lu_id: LuId
    frame: str
    lemma: str
    pos: str
    targets: tuple[tuple[int, int], ...]
    fes: tuple[FeRecord, ...]
    source: str
    split: str
    provenance: dict | None = None

    @property
    def instance_id(self) -> str:
        return f"{self.sentence_id}:{self.lu_id}"

    def to_dict(self) -> dict:
        d = {
            "sentence_id": self.sentence_id,
            "text": self.text,
            "lu_id": self.lu_id,
            "frame": self.frame,
            "lemma": self.lemma,
            "pos": self.pos,
            "targets": [list(t) for t in self.targets],
            "fes": [
                {"name": f.name, "start": f.start, "end": f.end, "phrase_type": f.phrase_type}
                for f in self.fes
            ],
            "source": self.source,
            "split": self.split,
        }
        if self.provenance is not None:
            d["provenance"] = self.provenance
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SentenceRecord":
        return cls(
            sentence_id=d["sentence_id"],
            text=d["text"],
            lu_id=d["lu_id"],
            frame=d["frame"],
            lemma=d["lemma"],
            pos=d["pos"],
            targets=tuple((t[0], t[1]) for t in d["targets"]),
            fes=tuple(
                FeRecord(f["name"], f["start"], f["end"], f.get("phrase_type", ""))
                for f in d["fes"]
            ),
            source=d["source"],
            split=d["split"],
            provenance=d.get("provenance"),
        )


def to_record(sentence: AnnotatedSentence, lexicon: Lexicon) -> SentenceRecord:
    lu = lexicon.lu(sentence.lu)
    frame = lexicon.frame(lu.frame)
    return SentenceRecord(
        sentence_id=sentence.sentence_id,
        text=sentence.text,
        lu_id=lu.id,
        frame=frame.name,
        lemma=lu.lemma,
        pos=lu.pos.value,
        targets=tuple((sp.start, sp.end) for sp in sentence.target_spans),
        fes=tuple(
            FeRecord(
                name=lexicon.fe(fs.fe).name,
                start=fs.span.start,
                end=fs.span.end,
                phrase_type=fs.phrase_type,
            )
            for fs in sentence.fe_spans
        ),
        source=sentence.source.value,
        split=sentence.split.value,
    )


def write_corpus_jsonl(path, records: Iterable[SentenceRecord]) -> int:
    """Write canonical sentence records, one JSON object per line. Returns count."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_corpus_jsonl(path) -> list[SentenceRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            if "_header" in d:
                continue
            records.append(SentenceRecord.from_dict(d))
    return records


def record_to_sentence(rec: SentenceRecord, lexicon: Lexicon) -> AnnotatedSentence:
    """Rebuild an AnnotatedSentence from a canonical record (FE names resolved
    against the lexicon)."""
    lu = lexicon.lu(rec.lu_id)
    return AnnotatedSentence(
        sentence_id=rec.sentence_id,
        text=rec.text,
        lu=rec.lu_id,
        target_spans=tuple(Span(s, e) for s, e in rec.targets),
        fe_spans=tuple(
            FeSpan(
                fe=lexicon.fe_named(lu.frame, f.name).id,
                span=Span(f.start, f.end),
                phrase_type=f.phrase_type,
            )
            for f in rec.fes
        ),
        source=Source(rec.source),
        split=Split(rec.split),
    )
