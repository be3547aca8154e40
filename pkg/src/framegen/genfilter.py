"""Generation requests, prompt construction, candidate splicing, and the
strict FE-fidelity filter.

The flow per masked instance: build one generator request asking for n
samples, parse each response into per-placeholder fills, splice fills back
into the sentence with recomputed offsets, then classify every regenerated
span and retain only candidates whose predicted FE types all match the
originals.
"""
from __future__ import annotations

import importlib.resources
import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .backends import NOT_AN_FE, BackendError, ProtocolError, new_request_id
from .expand import ConditioningMode, FeSlot, MaskedInstance
from .lexicon import Lexicon, LuId, Span
from .util import map_bounded

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Decoding:
    temperature: float = 0.7
    max_span_tokens: int = 24
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "max_span_tokens": self.max_span_tokens,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class GeneratorRequest:
    """One call to a generator backend, asking for ``n`` candidate fill sets.

    ``surface`` uses bare ``<mask>`` placeholders; the conditioning mode, frame
    name, and ordered FE names travel as separate fields, so any backend can
    rebuild tag-wrapped surfaces or prompt lines without parsing.
    """

    mode: ConditioningMode
    frame_name: str
    lu_lemma_pos: str
    surface: str
    masked_fes: tuple[str, ...]
    n: int
    decoding: Decoding
    masked: MaskedInstance
    request_id: str = field(default_factory=new_request_id)

    def to_wire(self) -> dict:
        return {
            "mode": self.mode.value,
            "frame": self.frame_name,
            "lu": self.lu_lemma_pos,
            "sentence_masked": self.surface,
            "fe_names": list(self.masked_fes),
            "n": self.n,
            "decoding": self.decoding.to_dict(),
            "request_id": self.request_id,
        }


def build_request(
    masked: MaskedInstance,
    n: int = 1,
    decoding: Decoding = Decoding(),
    request_id: str | None = None,
) -> GeneratorRequest:
    if n < 1:
        raise ValueError("candidate count must be >= 1")
    names = masked.masked_fe_names
    if not names:
        raise ValueError("masked instance has no spans to generate")
    return GeneratorRequest(
        mode=masked.mode,
        frame_name=masked.frame_name,
        lu_lemma_pos=masked.lu_label,
        surface=masked.bare_surface,
        masked_fes=names,
        n=n,
        decoding=decoding,
        masked=masked,
        request_id=request_id or new_request_id(),
    )


# -- prompt construction ------------------------------------------------------

PROMPT_TITLE = "Sentence completion using frame elements"

_DEFINITION_BASE = (
    "You need to complete the given sentence containing one or multiple blanks (<mask>)."
)
_DEFINITION_FE = " Your answer must be of the frame element type specified in FE Type."

_INSTRUCTION_TAIL = (
    " Generate the spans that fill up the blanks ONLY."
    " Do NOT generate the whole sentence or existing parts of the sentence."
    " Separate the generated spans of different blanks by a comma."
    " Generate the output of the task instance ONLY."
    " Do NOT include existing words or phrases before or after the blank."
)

_INSTRUCTION_HEAD = {
    ConditioningMode.NONE: "Fill in the blanks in the sentence based on the provided lexical unit.",
    ConditioningMode.FE: (
        "Fill in the blanks in the sentence based on the provided lexical unit and FE type."
    ),
    ConditioningMode.FRAME_FE: (
        "Fill in the blanks in the sentence based on the provided frame, lexical unit and FE type."
    ),
}


@dataclass(frozen=True)
class Prompt:
    title: str
    definition: str
    instructions: str
    exemplars: tuple[str, ...]
    task_input: str

    def render(self) -> str:
        blocks = [f"Title: {self.title}", f"Definition: {self.definition}"]
        blocks.extend(self.exemplars)
        blocks.append(f"Prompt: {self.instructions}")
        blocks.append(f"Task Input: {self.task_input}")
        blocks.append("Task Output:")
        return "\n".join(blocks)


def load_default_exemplars() -> list[dict]:
    data = importlib.resources.files("framegen.data").joinpath("prompt_exemplars.json")
    return json.loads(data.read_text(encoding="utf-8"))


def _task_line(mode: ConditioningMode, frame: str, lu: str, surface: str, fes: Sequence[str]) -> str:
    parts = []
    if mode is ConditioningMode.FRAME_FE:
        parts.append(f"Frame: {frame}.")
    parts.append(f"Lexical Unit: {lu}.")
    parts.append(f"Sentence: {surface}")
    if mode in (ConditioningMode.FE, ConditioningMode.FRAME_FE):
        parts.append(f"FE Type: {', '.join(fes)}.")
    return " ".join(parts)


def _render_exemplar(ex: dict, mode: ConditioningMode) -> str:
    lines = [
        "Example Input: "
        + _task_line(mode, ex["frame"], ex["lu"], ex["sentence_masked"], ex["fe_types"]),
        f"Example Output: {ex['output']}",
    ]
    reason_parts = []
    if mode is ConditioningMode.FRAME_FE:
        reason_parts.append(ex["reason"]["frame_sentence"])
    for i, fill in enumerate(ex["reason"]["fills"]):
        clause = f'The answer "{fill["fill"]}" fills up the {fill["ordinal"]} blank'
        if mode in (ConditioningMode.FE, ConditioningMode.FRAME_FE):
            fe_kind = "a frame element (FE)" if i == 0 else "an FE"
            clause += f' because it is {fe_kind} of type "{fill["fe"]}"'
        reason_parts.append(clause + ".")
    lines.append("Reason: " + " ".join(reason_parts))
    return "\n".join(lines)


def build_prompt(request: GeneratorRequest, exemplars: list[dict] | None = None) -> Prompt:
    """Structured few-shot prompt for an instruction-following generator,
    populated according to the conditioning mode."""
    if exemplars is None:
        exemplars = load_default_exemplars()
    mode = request.mode
    definition = _DEFINITION_BASE
    if mode in (ConditioningMode.FE, ConditioningMode.FRAME_FE):
        definition += _DEFINITION_FE
    return Prompt(
        title=PROMPT_TITLE,
        definition=definition,
        instructions=_INSTRUCTION_HEAD[mode] + _INSTRUCTION_TAIL,
        exemplars=tuple(_render_exemplar(ex, mode) for ex in exemplars),
        task_input=_task_line(
            mode, request.frame_name, request.lu_lemma_pos, request.surface, request.masked_fes
        ),
    )


# -- response parsing and splicing ---------------------------------------------

def parse_fills(text: str, expected: int) -> list[str] | None:
    """Split a comma-separated response into exactly ``expected`` fills.

    Responses with too many commas are repaired by merging fields from the
    right (a comma inside the last span is the common case); responses with
    too few fields are malformed and return None.
    """
    fields = [f.strip() for f in text.split(",")]
    if len(fields) < expected:
        return None
    while len(fields) > expected:
        tail = fields.pop()
        fields[-1] = f"{fields[-1]}, {tail}"
    return fields


class SpliceError(Exception):
    """Candidate fills cannot be spliced into the masked sentence."""


@dataclass(frozen=True)
class GenerationCandidate:
    """A filled-in sentence with all span offsets recomputed."""

    donor_id: str
    target_lu: LuId
    lu_label: str
    frame_name: str
    mode: ConditioningMode
    fills: tuple[str, ...]
    original_fills: tuple[str, ...]
    text: str
    target_spans: tuple[Span, ...]
    fe_slots: tuple[FeSlot, ...]
    generator_id: str = ""

    @property
    def generated_indices(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.fe_slots) if s.generated)

    def to_dict(self) -> dict:
        return {
            "donor_id": self.donor_id,
            "target_lu": self.target_lu,
            "lu": self.lu_label,
            "frame": self.frame_name,
            "mode": self.mode.value,
            "fills": list(self.fills),
            "original_fills": list(self.original_fills),
            "text": self.text,
            "targets": [[sp.start, sp.end] for sp in self.target_spans],
            "fes": [slot.to_dict() for slot in self.fe_slots],
            "generator_id": self.generator_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationCandidate":
        return cls(
            donor_id=d["donor_id"],
            target_lu=d["target_lu"],
            lu_label=d["lu"],
            frame_name=d["frame"],
            mode=ConditioningMode(d["mode"]),
            fills=tuple(d["fills"]),
            original_fills=tuple(d.get("original_fills", ())),
            text=d["text"],
            target_spans=tuple(Span(s, e) for s, e in d["targets"]),
            fe_slots=tuple(FeSlot.from_dict(f) for f in d["fes"]),
            generator_id=d.get("generator_id", ""),
        )


def splice(masked: MaskedInstance, fills: Sequence[str], generator_id: str = "") -> GenerationCandidate:
    """Substitute fills for placeholders left to right and recompute every
    span: filled spans get fresh offsets, untouched spans shift by the
    cumulative length deltas."""
    masked_slots = masked.masked_slots
    if len(fills) != len(masked_slots):
        raise SpliceError(
            f"{len(fills)} fills for {len(masked_slots)} placeholders in {masked.donor_id}"
        )
    fills = tuple(f.strip() for f in fills)
    for i, fill in enumerate(fills):
        if not fill:
            raise SpliceError(f"empty fill for placeholder {i} in {masked.donor_id}")

    # cuts in original-text order with their new lengths
    cuts = [(slot.span, len(fill)) for slot, fill in zip(masked_slots, fills)]

    def shift(pos: int) -> int:
        delta = 0
        for span, new_len in cuts:
            if span.end <= pos:
                delta += new_len - len(span)
        return pos + delta

    segments = masked.segments
    pieces = [segments[0]]
    new_masked_spans: list[Span] = []
    pos = len(segments[0])
    for fill, seg in zip(fills, segments[1:]):
        new_masked_spans.append(Span(pos, pos + len(fill)))
        pieces.append(fill)
        pos += len(fill)
        pieces.append(seg)
        pos += len(seg)
    text = "".join(pieces)

    fill_iter = iter(zip(new_masked_spans, fills))
    new_slots = []
    for slot in masked.fe_slots:
        if slot.generated:
            new_span, fill = next(fill_iter)
            new_slots.append(
                FeSlot(
                    fe_id=slot.fe_id,
                    name=slot.name,
                    span=new_span,
                    phrase_type=slot.phrase_type,
                    generated=True,
                )
            )
            if new_span.slice(text) != fill:
                raise SpliceError(f"fill offset mismatch in {masked.donor_id}")
        else:
            moved = Span(shift(slot.span.start), shift(slot.span.end))
            if moved.slice(text) != slot.span.slice(masked.text):
                raise SpliceError(f"untouched span moved incorrectly in {masked.donor_id}")
            new_slots.append(
                FeSlot(
                    fe_id=slot.fe_id,
                    name=slot.name,
                    span=moved,
                    phrase_type=slot.phrase_type,
                    generated=False,
                )
            )

    new_targets = []
    for t in masked.target_spans:
        moved = Span(shift(t.start), shift(t.end))
        if moved.slice(text) != t.slice(masked.text):
            raise SpliceError(f"target span moved incorrectly in {masked.donor_id}")
        new_targets.append(moved)

    return GenerationCandidate(
        donor_id=masked.donor_id,
        target_lu=masked.target_lu,
        lu_label=masked.lu_label,
        frame_name=masked.frame_name,
        mode=masked.mode,
        fills=fills,
        original_fills=masked.original_fills,
        text=text,
        target_spans=tuple(new_targets),
        fe_slots=tuple(new_slots),
        generator_id=generator_id,
    )


def overgenerate(request: GeneratorRequest, backend) -> list[GenerationCandidate]:
    """Ask the backend once for ``request.n`` samples; parse, splice, and keep
    the well-formed ones. Malformed samples are dropped, not errored."""
    raw = backend.generate(request)
    expected = len(request.masked_fes)
    generator_id = getattr(backend, "id", "")
    out: list[GenerationCandidate] = []
    for item in raw[: request.n]:
        if not isinstance(item, dict):
            log.warning("generator %s returned a non-object candidate; dropped", generator_id)
            continue
        if item.get("fills") is not None:
            fills = [str(f) for f in item["fills"]]
            if len(fills) != expected:
                log.warning(
                    "generator %s returned %d fills for %d placeholders; dropped",
                    generator_id, len(fills), expected,
                )
                continue
        elif isinstance(item.get("text"), str):
            parsed = parse_fills(item["text"], expected)
            if parsed is None:
                log.warning("generator %s response unparseable as %d fills; dropped",
                            generator_id, expected)
                continue
            fills = parsed
        else:
            log.warning("generator %s candidate has neither fills nor text; dropped", generator_id)
            continue
        try:
            out.append(splice(request.masked, fills, generator_id=generator_id))
        except SpliceError as exc:
            log.warning("candidate rejected: %s", exc)
    return out


# -- classification and filtering ----------------------------------------------

@dataclass(frozen=True)
class ClassifierRequest:
    """One span-classification query.

    ``encoded`` renders the model-input convention: delimiter tokens around
    the LU and the queried span, frame name appended to the end.
    """

    text: str
    frame_name: str
    lu_span: Span
    fe_span: Span
    request_id: str = field(default_factory=new_request_id)

    @property
    def encoded(self) -> str:
        return encode_classifier_input(self.text, self.lu_span, self.fe_span, self.frame_name)

    def to_wire(self) -> dict:
        return {
            "text": self.text,
            "frame": self.frame_name,
            "lu_span": [self.lu_span.start, self.lu_span.end],
            "fe_span": [self.fe_span.start, self.fe_span.end],
            "request_id": self.request_id,
        }


def encode_classifier_input(text: str, lu_span: Span, fe_span: Span, frame_name: str) -> str:
    """Insert ``<LU_START>/<LU_END>`` around the LU and ``<FE_START>/<FE_END>``
    around the queried span; append the frame name."""
    marks = sorted(
        [
            (lu_span.start, 1, "<LU_START> "),
            (lu_span.end, 0, " <LU_END>"),
            (fe_span.start, 1, "<FE_START> "),
            (fe_span.end, 0, " <FE_END>"),
        ],
        key=lambda m: (m[0], m[1]),
        reverse=True,
    )
    for pos, _, marker in marks:
        text = text[:pos] + marker + text[pos:]
    return f"{text} {frame_name}"


@dataclass(frozen=True)
class SpanVerdict:
    slot_index: int
    fe_expected: str
    fe_predicted: str
    score: float

    @property
    def matched(self) -> bool:
        return self.fe_expected == self.fe_predicted

    def to_dict(self) -> dict:
        return {
            "slot_index": self.slot_index,
            "fe_expected": self.fe_expected,
            "fe_predicted": self.fe_predicted,
            "score": self.score,
        }


@dataclass(frozen=True)
class FilterVerdict:
    per_span: tuple[SpanVerdict, ...]
    fidelity: float
    passed: bool
    unverifiable: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "per_span": [v.to_dict() for v in self.per_span],
            "fidelity": self.fidelity,
            "passed": self.passed,
            "unverifiable": self.unverifiable,
            "error": self.error,
        }


def classify_span(
    candidate: GenerationCandidate, slot_index: int, backend, lexicon: Lexicon
) -> SpanVerdict:
    """Query the classifier for one FE slot of a candidate and validate the
    label against the frame's FE inventory."""
    slot = candidate.fe_slots[slot_index]
    request = ClassifierRequest(
        text=candidate.text,
        frame_name=candidate.frame_name,
        lu_span=candidate.target_spans[0],
        fe_span=slot.span,
    )
    resp = backend.classify(request)
    label = resp["label"]
    frame = lexicon.frame_named(candidate.frame_name)
    valid = lexicon.fe_names(frame.id) | {NOT_AN_FE}
    if label not in valid:
        raise ProtocolError(
            f"classifier label {label!r} outside frame {candidate.frame_name!r} FE set",
            request_id=request.request_id,
        )
    return SpanVerdict(
        slot_index=slot_index,
        fe_expected=slot.name,
        fe_predicted=label,
        score=float(resp.get("score", 0.0)),
    )


@dataclass
class FilterResult:
    retained: list[GenerationCandidate]
    verdicts: list[FilterVerdict]

    @property
    def n_unverifiable(self) -> int:
        return sum(1 for v in self.verdicts if v.unverifiable)


def strict_filter(
    candidates: Sequence[GenerationCandidate],
    backend,
    lexicon: Lexicon,
    max_workers: int = 1,
) -> FilterResult:
    """Keep only candidates whose every regenerated span is classified as its
    original FE type (fidelity exactly 1.0). Classifier failures mark the
    candidate unverifiable, which fails closed: it is not retained."""

    def verdict_for(candidate: GenerationCandidate) -> FilterVerdict:
        per_span: list[SpanVerdict] = []
        try:
            for i in candidate.generated_indices:
                per_span.append(classify_span(candidate, i, backend, lexicon))
        except BackendError as exc:
            return FilterVerdict(
                per_span=tuple(per_span),
                fidelity=0.0,
                passed=False,
                unverifiable=True,
                error=str(exc),
            )
        if not per_span:
            raise ValueError(f"candidate {candidate.donor_id} has no generated spans")
        matches = sum(1 for v in per_span if v.matched)
        fidelity = matches / len(per_span)
        return FilterVerdict(per_span=tuple(per_span), fidelity=fidelity, passed=fidelity == 1.0)

    verdicts = map_bounded(verdict_for, candidates, max_workers)
    retained = [c for c, v in zip(candidates, verdicts) if v.passed]
    return FilterResult(retained=retained, verdicts=list(verdicts))


def fe_fidelity(verdicts: Iterable[FilterVerdict | SpanVerdict]) -> float:
    """Span-level matching fraction pooled over all span verdicts."""
    total = 0
    matched = 0
    for v in verdicts:
        spans = v.per_span if isinstance(v, FilterVerdict) else (v,)
        for sv in spans:
            total += 1
            matched += sv.matched
    if total == 0:
        raise ValueError("no span verdicts to aggregate")
    return matched / total


def candidate_record(candidate: GenerationCandidate, fidelity: float) -> dict:
    """Retained-output JSONL record with provenance."""
    return {
        "text": candidate.text,
        "frame": candidate.frame_name,
        "lu": candidate.lu_label,
        "targets": [[sp.start, sp.end] for sp in candidate.target_spans],
        "fes": [
            {
                "name": slot.name,
                "start": slot.span.start,
                "end": slot.span.end,
                "phrase_type": slot.phrase_type,
                "generated": slot.generated,
            }
            for slot in candidate.fe_slots
        ],
        "provenance": {
            "donor_id": candidate.donor_id,
            "lu_id": candidate.target_lu,
            "mode": candidate.mode.value,
            "generator_id": candidate.generator_id,
            "fidelity": fidelity,
        },
    }
