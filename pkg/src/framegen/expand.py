"""Sister-LU replacement and candidate-FE masking.

Takes an annotated donor sentence, swaps its lexical unit for an unannotated
sister, selects the FE spans worth regenerating, and renders the masked
surface under one of three conditioning modes.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from . import inflect
from .lexicon import (
    AnnotatedSentence,
    Coreness,
    Corpus,
    FeSpan,
    Lexicon,
    LuId,
    Pos,
    Span,
    explode_fulltext,
)
from .relations import RelationGraph, RelationType

log = logging.getLogger(__name__)

MASK = "<mask>"


class ConditioningMode(Enum):
    NONE = "none"
    FE = "fe"
    FRAME_FE = "frame_fe"


def wrap_mask(mode: ConditioningMode, frame_name: str, fe_name: str) -> str:
    """Render one placeholder under the given conditioning mode."""
    if mode is ConditioningMode.NONE:
        return MASK
    if mode is ConditioningMode.FE:
        return f"<FE: {fe_name}> {MASK} </FE: {fe_name}>"
    tag = f"Frame: {frame_name} + FE: {fe_name}"
    return f"<{tag}> {MASK} </{tag}>"


# -- candidate selection ----------------------------------------------------

@dataclass(frozen=True)
class CandidateConfig:
    include_core_unexpressed: bool = False
    pp_phrase_types: tuple[str, ...] = ("PP",)
    ancestor_relations: frozenset[RelationType] | None = None  # None -> graph default


class CandidateSelector:
    """Marks FE spans for regeneration: the span's FE must be core, and either
    free of Agent/Self-mover ancestry or realized as a prepositional phrase."""

    def __init__(
        self,
        lexicon: Lexicon,
        graph: RelationGraph,
        config: CandidateConfig = CandidateConfig(),
    ) -> None:
        self.lexicon = lexicon
        self.graph = graph
        self.config = config
        self._core = {Coreness.CORE}
        if config.include_core_unexpressed:
            self._core.add(Coreness.CORE_UNEXPRESSED)
        self._forbidden_cache: dict[int, bool] = {}

    def _forbidden(self, fe_id: int) -> bool:
        hit = self._forbidden_cache.get(fe_id)
        if hit is None:
            hit = self.graph.has_forbidden_ancestor(fe_id, self.config.ancestor_relations)
            self._forbidden_cache[fe_id] = hit
        return hit

    def is_candidate(self, fe_span: FeSpan) -> bool:
        fe = self.lexicon.fe(fe_span.fe)
        if fe.coreness not in self._core:
            return False
        return (not self._forbidden(fe.id)) or fe_span.phrase_type in self.config.pp_phrase_types

    def select_spans(self, fe_spans: Sequence[FeSpan]) -> list[FeSpan]:
        chosen = [fs for fs in fe_spans if self.is_candidate(fs)]
        chosen.sort(key=lambda fs: fs.span)
        return chosen

    def __call__(self, sentence: AnnotatedSentence) -> list[FeSpan]:
        return self.select_spans(sentence.fe_spans)


def select_candidate_fes(
    sentence: AnnotatedSentence, lexicon: Lexicon, graph: RelationGraph,
    config: CandidateConfig = CandidateConfig(),
) -> list[FeSpan]:
    return CandidateSelector(lexicon, graph, config)(sentence)


# -- LU replacement ---------------------------------------------------------

class ReplacementError(Exception):
    """Replacement is impossible for this donor/target pair."""


class ReplacementSkip(ReplacementError):
    """Replacement should be skipped for this donor, not treated as fatal."""


@dataclass(frozen=True)
class ReplacementInstance:
    """Donor sentence with its LU token swapped for the target lemma."""

    donor_id: str
    target_lu: LuId
    text: str
    target_spans: tuple[Span, ...]
    fe_spans: tuple[FeSpan, ...]
    donor: AnnotatedSentence | None = None


def _shift_span(span: Span, cut: Span, delta: int) -> Span:
    """Move a span after text at ``cut`` changed length by ``delta``."""
    if span.end <= cut.start:
        return span
    if span.start >= cut.end:
        return span.shift(delta)
    if span.start <= cut.start and span.end >= cut.end:
        return Span(span.start, span.end + delta)
    raise ValueError(f"span {span} partially overlaps replaced span {cut}")


def replace_lu(donor: AnnotatedSentence, target: LuId, lexicon: Lexicon) -> ReplacementInstance:
    """Swap the donor's LU token for the target lemma, inflected to the donor
    token's surface-form class, and shift every span accordingly."""
    donor_lu = lexicon.lu(donor.lu)
    target_lu = lexicon.lu(target)
    if target_lu.frame != donor_lu.frame:
        raise ReplacementError(
            f"target {target_lu.label} and donor {donor_lu.label} evoke different frames"
        )
    if target_lu.pos is not donor_lu.pos:
        raise ReplacementError(
            f"target {target_lu.label} and donor {donor_lu.label} differ in POS"
        )
    if len(donor.target_spans) != 1:
        raise ReplacementSkip(
            f"donor {donor.instance_id} realizes its LU over {len(donor.target_spans)} spans; "
            "no alignment for a replacement lemma"
        )

    cut = donor.target_spans[0]
    donor_token = cut.slice(donor.text)
    if target == donor.lu:
        rendered = donor_token
    else:
        rendered = inflect.match_surface(
            donor_token, donor_lu.lemma, target_lu.lemma, target_lu.pos.value
        )
        if rendered is None:
            log.warning(
                "cannot detect surface form of %r for lemma %s; using bare lemma %r",
                donor_token, donor_lu.lemma, target_lu.lemma,
            )
            rendered = target_lu.lemma
        rendered = inflect.recase(rendered, donor_token)

    delta = len(rendered) - len(cut)
    text = donor.text[: cut.start] + rendered + donor.text[cut.end :]
    try:
        fe_spans = tuple(
            FeSpan(
                fe=fs.fe,
                span=_shift_span(fs.span, cut, delta),
                phrase_type=fs.phrase_type,
                grammatical_function=fs.grammatical_function,
            )
            for fs in donor.fe_spans
        )
    except ValueError as exc:
        raise ReplacementSkip(f"donor {donor.instance_id}: {exc}") from None

    return ReplacementInstance(
        donor_id=donor.instance_id,
        target_lu=target,
        text=text,
        target_spans=(Span(cut.start, cut.start + len(rendered)),),
        fe_spans=fe_spans,
        donor=donor,
    )


# -- masking ----------------------------------------------------------------

@dataclass(frozen=True)
class FeSlot:
    """An FE span carried through replacement/generation. ``generated`` marks
    spans selected for regeneration (later: spans that were regenerated)."""

    fe_id: int | None
    name: str
    span: Span
    phrase_type: str
    generated: bool

    def to_dict(self) -> dict:
        return {
            "fe_id": self.fe_id,
            "name": self.name,
            "start": self.span.start,
            "end": self.span.end,
            "phrase_type": self.phrase_type,
            "generated": self.generated,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeSlot":
        return cls(
            fe_id=d.get("fe_id"),
            name=d["name"],
            span=Span(d["start"], d["end"]),
            phrase_type=d.get("phrase_type", ""),
            generated=d["generated"],
        )


@dataclass(frozen=True)
class MaskedInstance:
    """A replacement sentence with its candidate FE spans masked."""

    donor_id: str
    target_lu: LuId
    lu_label: str
    frame_name: str
    mode: ConditioningMode
    text: str
    target_spans: tuple[Span, ...]
    fe_slots: tuple[FeSlot, ...]  # ordered by start

    @property
    def masked_slots(self) -> tuple[FeSlot, ...]:
        return tuple(s for s in self.fe_slots if s.generated)

    @property
    def masked_fe_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.masked_slots)

    @property
    def original_fills(self) -> tuple[str, ...]:
        return tuple(s.span.slice(self.text) for s in self.masked_slots)

    @property
    def segments(self) -> tuple[str, ...]:
        """Unmasked text pieces around the masked spans (len = masks + 1)."""
        parts = []
        pos = 0
        for slot in self.masked_slots:
            parts.append(self.text[pos : slot.span.start])
            pos = slot.span.end
        parts.append(self.text[pos:])
        return tuple(parts)

    @property
    def surface(self) -> str:
        """Masked sentence with per-mode conditioning tags."""
        return self._render(lambda slot: wrap_mask(self.mode, self.frame_name, slot.name))

    @property
    def bare_surface(self) -> str:
        """Masked sentence with plain placeholders, no conditioning tags."""
        return self._render(lambda slot: MASK)

    def _render(self, wrap) -> str:
        segments = self.segments
        out = [segments[0]]
        for slot, seg in zip(self.masked_slots, segments[1:]):
            out.append(wrap(slot))
            out.append(seg)
        return "".join(out)

    def to_dict(self) -> dict:
        return {
            "donor_id": self.donor_id,
            "target_lu": self.target_lu,
            "lu": self.lu_label,
            "frame": self.frame_name,
            "mode": self.mode.value,
            "text": self.text,
            "targets": [[sp.start, sp.end] for sp in self.target_spans],
            "fes": [slot.to_dict() for slot in self.fe_slots],
            "surface": self.surface,
            "original_fills": list(self.original_fills),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MaskedInstance":
        return cls(
            donor_id=d["donor_id"],
            target_lu=d["target_lu"],
            lu_label=d["lu"],
            frame_name=d["frame"],
            mode=ConditioningMode(d["mode"]),
            text=d["text"],
            target_spans=tuple(Span(s, e) for s, e in d["targets"]),
            fe_slots=tuple(FeSlot.from_dict(f) for f in d["fes"]),
        )


class NothingToGenerate(Exception):
    """The instance has no candidate FE span to mask."""


def maskable_spans(candidates: Sequence[FeSpan], target_spans: Sequence[Span]) -> list[FeSpan]:
    """Candidates that can actually be masked: regenerating a span that covers
    the LU token would delete the frame-evoking word."""
    return [
        c for c in candidates if not any(c.span.overlaps(t) for t in target_spans)
    ]


def build_masked(
    instance: ReplacementInstance,
    candidates: Sequence[FeSpan],
    mode: ConditioningMode,
    lexicon: Lexicon,
) -> MaskedInstance:
    """Mask the given candidate FE spans of a replacement instance."""
    usable = maskable_spans(candidates, instance.target_spans)
    if not usable:
        raise NothingToGenerate(f"nothing to generate for {instance.donor_id}")
    masked_keys = {(c.fe, c.span) for c in usable}
    target_lu = lexicon.lu(instance.target_lu)
    slots = tuple(
        FeSlot(
            fe_id=fs.fe,
            name=lexicon.fe(fs.fe).name,
            span=fs.span,
            phrase_type=fs.phrase_type,
            generated=(fs.fe, fs.span) in masked_keys,
        )
        for fs in sorted(instance.fe_spans, key=lambda f: f.span)
    )
    return MaskedInstance(
        donor_id=instance.donor_id,
        target_lu=instance.target_lu,
        lu_label=target_lu.label,
        frame_name=lexicon.frame(target_lu.frame).name,
        mode=mode,
        text=instance.text,
        target_spans=instance.target_spans,
        fe_slots=slots,
    )


# -- expansion driver ---------------------------------------------------------

def donors_by_lu(corpus: Corpus) -> dict[LuId, list[AnnotatedSentence]]:
    index: dict[LuId, list[AnnotatedSentence]] = {}
    for sent in explode_fulltext(corpus):
        index.setdefault(sent.lu, []).append(sent)
    return index


def expansion_targets(lexicon: Lexicon, pos: Pos | None = Pos.V, annotated: bool = False):
    """LUs eligible for expansion: by default, unannotated verb LUs."""
    out = [
        lu
        for lu in lexicon.lus.values()
        if lu.has_annotations == annotated and (pos is None or lu.pos is pos)
    ]
    out.sort(key=lambda lu: lu.id)
    return out


def expand_lu(
    target: LuId,
    lexicon: Lexicon,
    graph: RelationGraph,
    donor_index: dict[LuId, list[AnnotatedSentence]],
    selector: CandidateSelector,
    mode: ConditioningMode,
    limit: int = 1,
) -> list[MaskedInstance]:
    """Masked instances for one target LU, drawn from its sisters' sentences.

    Donor order is deterministic: sisters by descending annotation count, then
    each sister's sentences by descending candidate count with sentence id as
    tiebreak.
    """
    out: list[MaskedInstance] = []
    for sister in graph.sister_lus(target):
        donors = sorted(
            donor_index.get(sister, ()),
            key=lambda s: (-len(selector(s)), s.sentence_id),
        )
        for donor in donors:
            if len(out) >= limit:
                return out
            try:
                instance = replace_lu(donor, target, lexicon)
            except ReplacementSkip as exc:
                log.debug("skipping donor: %s", exc)
                continue
            candidates = selector.select_spans(instance.fe_spans)
            try:
                out.append(build_masked(instance, candidates, mode, lexicon))
            except NothingToGenerate:
                continue
        if len(out) >= limit:
            return out
    return out
