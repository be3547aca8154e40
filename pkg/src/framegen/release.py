"""Parse a FrameNet-style XML release directory into a Lexicon and Corpus.

Expected layout::

    release_dir/
        frameIndex.xml          (optional index; frame/*.xml is authoritative)
        frame/*.xml             frame definitions with FEs and LU declarations
        luIndex.xml             LU index with annotation flags
        lu/*.xml                per-LU annotated sentences (lexicographic data)
        fulltext/*.xml          document annotation (fulltext data)
        frRelation.xml          typed frame/FE relation edges

Release files store inclusive character offsets; they are converted to the
package's half-open spans. Files are read as UTF-8 and offsets are Unicode
code-point indices.
"""
from __future__ import annotations

import json
import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from .lexicon import (
    AnnotatedSentence,
    Coreness,
    Corpus,
    DocId,
    FeSpan,
    Frame,
    FrameElement,
    FulltextSentence,
    LexicalUnit,
    Lexicon,
    LexiconError,
    LuAnnotation,
    Pos,
    Source,
    Span,
    Split,
)
from .relations import RELEASE_RELATION_NAMES, FeRelationEdge, FrameRelationEdge

log = logging.getLogger(__name__)


class ReleaseError(Exception):
    """Fatal problem with the release directory or its files."""


def _local(tag: str) -> str:
    """Element tag without its XML namespace."""
    return tag.rsplit("}", 1)[-1]


def _children(elem: ET.Element, name: str):
    return [c for c in elem if _local(c.tag) == name]


def _child(elem: ET.Element, name: str) -> ET.Element | None:
    for c in elem:
        if _local(c.tag) == name:
            return c
    return None


def _parse_xml(path: Path) -> ET.Element:
    try:
        return ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise ReleaseError(f"malformed XML in {path}: {exc}") from exc


def _int_attr(elem: ET.Element, name: str, path: Path) -> int:
    raw = elem.get(name)
    if raw is None:
        raise ReleaseError(f"{path}: element <{_local(elem.tag)}> missing attribute {name!r}")
    try:
        return int(raw)
    except ValueError:
        raise ReleaseError(
            f"{path}: element <{_local(elem.tag)}> has non-integer {name}={raw!r}"
        ) from None


@dataclass
class SplitConfig:
    """Document-name lists assigning fulltext documents to splits. Documents in
    no list get ``default_split`` (unassigned unless the config says otherwise)."""

    train: set[str] = field(default_factory=set)
    dev: set[str] = field(default_factory=set)
    test: set[str] = field(default_factory=set)
    lexicographic_split: Split = Split.TRAIN
    default_split: Split = Split.UNASSIGNED

    @classmethod
    def load(cls, path) -> "SplitConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(
            train=set(raw.get("train", [])),
            dev=set(raw.get("dev", [])),
            test=set(raw.get("test", [])),
            lexicographic_split=Split(raw.get("lexicographic_split", "train")),
            default_split=Split(raw.get("default_split", "unassigned")),
        )

    def split_for_doc(self, doc_name: str) -> Split:
        if doc_name in self.dev:
            return Split.DEV
        if doc_name in self.test:
            return Split.TEST
        if doc_name in self.train:
            return Split.TRAIN
        return self.default_split


@dataclass
class _LuDecl:
    id: int
    name: str
    pos_raw: str
    frame: int
    annotated: int


def _parse_frame_file(path: Path):
    root = _parse_xml(path)
    if _local(root.tag) != "frame":
        raise ReleaseError(f"{path}: expected <frame> root, got <{_local(root.tag)}>")
    frame_id = _int_attr(root, "ID", path)
    name = root.get("name") or path.stem
    definition_el = _child(root, "definition")
    definition = (definition_el.text or "") if definition_el is not None else ""

    fes = []
    for fe_el in _children(root, "FE"):
        core_raw = fe_el.get("coreType")
        if core_raw is None:
            raise ReleaseError(f"{path}: element <FE> missing attribute 'coreType'")
        try:
            coreness = Coreness.parse(core_raw)
        except LexiconError as exc:
            raise ReleaseError(f"{path}: {exc}") from None
        fe_def = _child(fe_el, "definition")
        fes.append(
            FrameElement(
                id=_int_attr(fe_el, "ID", path),
                frame=frame_id,
                name=fe_el.get("name", ""),
                coreness=coreness,
                definition=(fe_def.text or "") if fe_def is not None else "",
            )
        )

    lus = []
    for lu_el in _children(root, "lexUnit"):
        count_el = _child(lu_el, "sentenceCount")
        annotated = int(count_el.get("annotated", "0")) if count_el is not None else 0
        lus.append(
            _LuDecl(
                id=_int_attr(lu_el, "ID", path),
                name=lu_el.get("name", ""),
                pos_raw=lu_el.get("POS", ""),
                frame=frame_id,
                annotated=annotated,
            )
        )

    frame = Frame(
        id=frame_id,
        name=name,
        definition=definition,
        fes=tuple(fe.id for fe in fes),
    )
    return frame, fes, lus


def _parse_lu_index(path: Path) -> dict[int, bool]:
    root = _parse_xml(path)
    flags: dict[int, bool] = {}
    for lu_el in root.iter():
        if _local(lu_el.tag) != "lu":
            continue
        lu_id = _int_attr(lu_el, "ID", path)
        flags[lu_id] = lu_el.get("hasAnnotation", "false").lower() == "true"
    return flags


def _parse_relations(path: Path, frame_ids: set, fe_ids: set):
    root = _parse_xml(path)
    edges: list[FrameRelationEdge] = []
    for type_el in _children(root, "frameRelationType"):
        type_name = type_el.get("name", "")
        rel_type = RELEASE_RELATION_NAMES.get(type_name)
        if rel_type is None:
            log.warning("skipping unknown relation type %r in %s", type_name, path)
            continue
        for rel_el in _children(type_el, "frameRelation"):
            sup_frame = _int_attr(rel_el, "supID", path)
            sub_frame = _int_attr(rel_el, "subID", path)
            for fid in (sup_frame, sub_frame):
                if fid not in frame_ids:
                    raise ReleaseError(
                        f"{path}: frame relation references unknown frame id {fid}"
                    )
            fe_edges = []
            for fe_el in _children(rel_el, "FERelation"):
                sup_fe = _int_attr(fe_el, "supID", path)
                sub_fe = _int_attr(fe_el, "subID", path)
                for feid in (sup_fe, sub_fe):
                    if feid not in fe_ids:
                        raise ReleaseError(
                            f"{path}: FE relation references unknown FE id {feid}"
                        )
                fe_edges.append(
                    FeRelationEdge(relation_type=rel_type, parent_fe=sup_fe, child_fe=sub_fe)
                )
            edges.append(
                FrameRelationEdge(
                    relation_type=rel_type,
                    parent_frame=sup_frame,
                    child_frame=sub_frame,
                    fe_edges=tuple(fe_edges),
                )
            )
    return edges


@dataclass
class _LayerLabels:
    """Labels of one annotation set, grouped by layer name (rank 1 only)."""

    target: list[tuple[int, int]] = field(default_factory=list)
    fe: list[dict] = field(default_factory=list)
    pt: dict[tuple[int, int], str] = field(default_factory=dict)
    gf: dict[tuple[int, int], str] = field(default_factory=dict)


def _collect_layers(ann_el: ET.Element, path: Path) -> _LayerLabels:
    out = _LayerLabels()
    for layer in _children(ann_el, "layer"):
        lname = layer.get("name", "")
        rank = layer.get("rank", "1")
        if lname in ("FE", "PT", "GF") and rank != "1":
            continue  # only the primary annotation layer is ingested
        for label in _children(layer, "label"):
            start_raw, end_raw = label.get("start"), label.get("end")
            if lname == "FE" and start_raw is None and label.get("itype"):
                continue  # null instantiation: no overt span
            if start_raw is None or end_raw is None:
                continue
            start, end = int(start_raw), int(end_raw) + 1  # inclusive -> half-open
            if lname == "Target":
                out.target.append((start, end))
            elif lname == "FE":
                out.fe.append(
                    {
                        "start": start,
                        "end": end,
                        "name": label.get("name", ""),
                        "fe_id": int(label.get("feID")) if label.get("feID") else None,
                    }
                )
            elif lname == "PT":
                out.pt[(start, end)] = label.get("name", "")
            elif lname == "GF":
                out.gf[(start, end)] = label.get("name", "")
    return out


def _build_fe_spans(
    labels: _LayerLabels, frame_id: int, lexicon: Lexicon, path: Path
) -> tuple[FeSpan, ...]:
    spans = []
    for raw in labels.fe:
        key = (raw["start"], raw["end"])
        if raw["fe_id"] is not None:
            if raw["fe_id"] not in lexicon.fes:
                raise ReleaseError(f"{path}: FE label references unknown FE id {raw['fe_id']}")
            fe_id = raw["fe_id"]
        else:
            fe_id = lexicon.fe_named(frame_id, raw["name"]).id  # LexiconError if dangling
        spans.append(
            FeSpan(
                fe=fe_id,
                span=Span(*key),
                phrase_type=labels.pt.get(key, ""),
                grammatical_function=labels.gf.get(key),
            )
        )
    return tuple(spans)


def _parse_lu_file(path: Path, lexicon: Lexicon) -> list[AnnotatedSentence]:
    root = _parse_xml(path)
    if _local(root.tag) != "lexUnit":
        raise ReleaseError(f"{path}: expected <lexUnit> root, got <{_local(root.tag)}>")
    lu_id = _int_attr(root, "ID", path)
    if lu_id not in lexicon.lus:
        raise ReleaseError(f"{path}: annotation file references unknown LU id {lu_id}")
    frame_id = lexicon.lu(lu_id).frame

    sentences: list[AnnotatedSentence] = []
    for sub in _children(root, "subCorpus"):
        for sent_el in _children(sub, "sentence"):
            sent_id = _int_attr(sent_el, "ID", path)
            text_el = _child(sent_el, "text")
            text = text_el.text or "" if text_el is not None else ""
            for ann_el in _children(sent_el, "annotationSet"):
                if ann_el.get("status", "") == "UNANN":
                    continue
                labels = _collect_layers(ann_el, path)
                if not labels.target:
                    log.warning("%s: sentence %d has no target span, dropped", path, sent_id)
                    continue
                try:
                    sent = AnnotatedSentence(
                        sentence_id=sent_id,
                        text=text,
                        lu=lu_id,
                        target_spans=tuple(Span(s, e) for s, e in labels.target),
                        fe_spans=_build_fe_spans(labels, frame_id, lexicon, path),
                        source=Source.LEXICOGRAPHIC,
                    )
                    sent.validate()
                except ValueError as exc:
                    log.warning("%s: sentence %d dropped: %s", path, sent_id, exc)
                    continue
                sentences.append(sent)
    return sentences


def _parse_fulltext_file(path: Path, lexicon: Lexicon):
    root = _parse_xml(path)
    if _local(root.tag) != "fullTextAnnotation":
        raise ReleaseError(
            f"{path}: expected <fullTextAnnotation> root, got <{_local(root.tag)}>"
        )
    header = _child(root, "header")
    doc_id: DocId = 0
    doc_name = path.stem
    if header is not None:
        corpus_el = _child(header, "corpus")
        if corpus_el is not None:
            doc_el = _child(corpus_el, "document")
            if doc_el is not None:
                doc_id = int(doc_el.get("ID", "0"))
                doc_name = f"{corpus_el.get('name', '')}__{doc_el.get('name', '')}"

    sentences: list[FulltextSentence] = []
    for sent_el in _children(root, "sentence"):
        sent_id = _int_attr(sent_el, "ID", path)
        text_el = _child(sent_el, "text")
        text = text_el.text or "" if text_el is not None else ""
        annotations: list[LuAnnotation] = []
        for ann_el in _children(sent_el, "annotationSet"):
            lu_raw = ann_el.get("luID")
            if lu_raw is None or ann_el.get("status", "") == "UNANN":
                continue  # POS layer set or construction annotation
            lu_id = int(lu_raw)
            if lu_id not in lexicon.lus:
                raise ReleaseError(f"{path}: annotation set references unknown LU id {lu_id}")
            frame_id = lexicon.lu(lu_id).frame
            labels = _collect_layers(ann_el, path)
            if not labels.target:
                log.warning("%s: sentence %d LU %d has no target, dropped", path, sent_id, lu_id)
                continue
            try:
                probe = AnnotatedSentence(
                    sentence_id=sent_id,
                    text=text,
                    lu=lu_id,
                    target_spans=tuple(Span(s, e) for s, e in labels.target),
                    fe_spans=_build_fe_spans(labels, frame_id, lexicon, path),
                    source=Source.FULLTEXT,
                )
                probe.validate()
            except ValueError as exc:
                log.warning("%s: sentence %d LU %d dropped: %s", path, sent_id, lu_id, exc)
                continue
            annotations.append(
                LuAnnotation(
                    lu=lu_id,
                    target_spans=probe.target_spans,
                    fe_spans=probe.fe_spans,
                )
            )
        sentences.append(
            FulltextSentence(
                sentence_id=sent_id,
                doc=doc_id,
                text=text,
                annotations=tuple(annotations),
            )
        )
    return doc_name, sentences


def load_release(release_dir, split_config=None) -> tuple[Lexicon, Corpus]:
    """Parse a release directory. ``split_config`` may be a path to a JSON split
    file or a SplitConfig; without it every sentence is tagged Unassigned."""
    release = Path(release_dir)
    if not release.is_dir():
        raise ReleaseError(f"release directory not found: {release}")
    frame_dir = release / "frame"
    if not frame_dir.is_dir():
        raise ReleaseError(f"missing frame definitions directory: {frame_dir}")
    rel_path = release / "frRelation.xml"
    if not rel_path.is_file():
        raise ReleaseError(f"missing frame-relation file: {rel_path}")
    index_path = release / "luIndex.xml"
    if not index_path.is_file():
        raise ReleaseError(f"missing LU index: {index_path}")

    if split_config is not None and not isinstance(split_config, SplitConfig):
        split_config = SplitConfig.load(split_config)

    frames: list[Frame] = []
    fes: list[FrameElement] = []
    lu_decls: list[_LuDecl] = []
    for path in sorted(frame_dir.glob("*.xml")):
        frame, frame_fes, frame_lus = _parse_frame_file(path)
        frames.append(frame)
        fes.extend(frame_fes)
        lu_decls.extend(frame_lus)
    if not frames:
        raise ReleaseError(f"no frame files found under {frame_dir}")

    ann_flags = _parse_lu_index(index_path)
    frame_ids = {f.id for f in frames}
    decl_ids = {d.id for d in lu_decls}
    for lu_id in ann_flags:
        if lu_id not in decl_ids:
            raise ReleaseError(f"{index_path}: index references unknown LU id {lu_id}")

    lus: list[LexicalUnit] = []
    for decl in lu_decls:
        lemma, _, pos_suffix = decl.name.rpartition(".")
        try:
            pos = Pos.parse(decl.pos_raw or pos_suffix)
        except LexiconError:
            log.warning("dropping LU %s (id %d): unsupported POS %r", decl.name, decl.id, decl.pos_raw)
            continue
        has_ann = ann_flags.get(decl.id, decl.annotated > 0)
        lus.append(
            LexicalUnit(
                id=decl.id,
                frame=decl.frame,
                lemma=lemma or decl.name,
                pos=pos,
                has_annotations=has_ann,
                annotation_count=decl.annotated,
            )
        )

    fe_ids = {fe.id for fe in fes}
    edges = _parse_relations(rel_path, frame_ids, fe_ids)
    lexicon = Lexicon(frames, fes, lus, frame_relations=edges)

    corpus = Corpus()
    lu_dir = release / "lu"
    if lu_dir.is_dir():
        for path in sorted(lu_dir.glob("*.xml")):
            corpus.lexicographic.extend(_parse_lu_file(path, lexicon))
    else:
        log.warning("no lu/ directory under %s; no lexicographic data loaded", release)

    fulltext_dir = release / "fulltext"
    doc_names: dict[int, str] = {}
    if fulltext_dir.is_dir():
        for path in sorted(fulltext_dir.glob("*.xml")):
            doc_name, sentences = _parse_fulltext_file(path, lexicon)
            corpus.fulltext.extend(sentences)
            for s in sentences:
                doc_names[s.doc] = doc_name
    else:
        log.warning("no fulltext/ directory under %s; no fulltext data loaded", release)

    if split_config is not None:
        corpus.lexicographic = [
            AnnotatedSentence(
                sentence_id=s.sentence_id,
                text=s.text,
                lu=s.lu,
                target_spans=s.target_spans,
                fe_spans=s.fe_spans,
                source=s.source,
                doc=s.doc,
                split=split_config.lexicographic_split,
            )
            for s in corpus.lexicographic
        ]
        corpus.fulltext = [
            FulltextSentence(
                sentence_id=s.sentence_id,
                doc=s.doc,
                text=s.text,
                annotations=s.annotations,
                split=split_config.split_for_doc(doc_names.get(s.doc, "")),
            )
            for s in corpus.fulltext
        ]

    # annotation counts observed in the corpus refine the declared ones
    observed: dict[int, int] = {}
    for sent in corpus.lexicographic:
        observed[sent.lu] = observed.get(sent.lu, 0) + 1
    if observed:
        refreshed = [
            LexicalUnit(
                id=lu.id,
                frame=lu.frame,
                lemma=lu.lemma,
                pos=lu.pos,
                has_annotations=lu.has_annotations or observed.get(lu.id, 0) > 0,
                annotation_count=max(lu.annotation_count, observed.get(lu.id, 0)),
            )
            for lu in lexicon.lus.values()
        ]
        lexicon = Lexicon(
            lexicon.frames.values(), lexicon.fes.values(), refreshed, lexicon.frame_relations
        )

    log.info(
        "loaded release: %d frames, %d FEs, %d LUs, %d lexicographic + %d fulltext sentences",
        len(lexicon.frames),
        len(lexicon.fes),
        len(lexicon.lus),
        len(corpus.lexicographic),
        len(corpus.fulltext),
    )
    return lexicon, corpus
