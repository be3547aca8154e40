"""Synthetic miniature release in the real XML layout: namespaced elements,
inclusive character offsets, Target/FE/PT/GF layers with ranks, an UNANN POS
annotation set on fulltext sentences, and index/relation files.

Used by tests to exercise the parser and the pipeline end to end without the
full lexical database.
"""
from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

XMLNS = "http://framenet.icsi.berkeley.edu"

# frame id -> (name, [(fe id, fe name, coreness)])
FRAMES = {
    1: ("Intentionally_act", [(101, "Agent", "Core"), (102, "Act", "Core")]),
    2: (
        "Awareness",
        [(201, "Cognizer", "Core"), (202, "Content", "Core"), (203, "Time", "Peripheral")],
    ),
    3: (
        "Self_motion",
        [
            (301, "Self_mover", "Core"),
            (302, "Goal", "Core"),
            (303, "Path", "Core"),
            (304, "Time", "Peripheral"),
        ],
    ),
    4: (
        "Rewards_and_punishments",
        [
            (401, "Agent", "Core"),
            (402, "Evaluee", "Core"),
            (403, "Reason", "Core"),
            (404, "Time", "Peripheral"),
        ],
    ),
    5: ("Leadership", [(501, "Leader", "Core"), (502, "Governed", "Core")]),
    6: ("Buildings", [(601, "Building", "Core")]),
}

# lu id -> (label, frame id, annotated sentence count)
LUS = {
    1001: ("know.v", 2, 1),
    1002: ("presume.v", 2, 0),
    2001: ("run.v", 3, 1),
    2002: ("walk.v", 3, 1),
    2003: ("climb.v", 3, 0),
    3001: ("discipline.v", 4, 2),
    3002: ("punish.v", 4, 1),
    3003: ("reward.v", 4, 0),
    4001: ("king.n", 5, 1),
    4002: ("rector.n", 5, 1),
    5001: ("home.n", 6, 0),
}

FIG_TEXT = "Growing up, boys are disciplined for breaking the rules."

# (sentence id, text, target [start, end) in code points, FE spans, PTs)
# per-LU lexicographic sentences; offsets here are half-open, converted to
# inclusive when written
LU_SENTENCES = {
    1001: [
        {
            "id": 9001,
            "text": "She knew the answer.",
            "target": (4, 8),
            "fes": [("Cognizer", 0, 3, "NP"), ("Content", 9, 19, "NP")],
        }
    ],
    3001: [
        {
            "id": 9002,
            "text": FIG_TEXT,
            "target": (21, 32),
            "fes": [
                ("Time", 0, 10, "VPing"),
                ("Evaluee", 12, 16, "NP"),
                ("Reason", 33, 55, "PP"),
            ],
        },
        {
            "id": 9003,
            "text": "They disciplined the student.",
            "target": (5, 16),
            "fes": [("Agent", 0, 4, "NP"), ("Evaluee", 17, 28, "NP")],
            "ini_fes": ["Reason"],  # null instantiation labels, no span
            "junk_rank2": True,  # second FE layer that must be ignored
        },
    ],
    3002: [
        {
            "id": 9004,
            "text": "The teacher punished the students for cheating.",
            "target": (12, 20),
            "fes": [
                ("Agent", 0, 11, "NP"),
                ("Evaluee", 21, 33, "NP"),
                ("Reason", 34, 46, "PP"),
            ],
        },
        {
            # FE span out of bounds: the loader must drop this sentence
            "id": 9007,
            "text": "Bad.",
            "target": (0, 3),
            "fes": [("Reason", 10, 20, "PP")],
        },
    ],
    4001: [
        {
            "id": 9005,
            "text": "No prior Scottish king claimed his minority ended at this age.",
            "target": (18, 22),
            "fes": [],
        }
    ],
    4002: [
        {
            "id": 9006,
            "text": "The rector spoke at the assembly.",
            "target": (4, 10),
            "fes": [],
        }
    ],
    2001: [
        {
            "id": 9008,
            "text": "The dog ran into the yard.",
            "target": (8, 11),
            "fes": [("Self_mover", 0, 7, "NP"), ("Goal", 12, 25, "PP")],
        }
    ],
    2002: [
        {
            "id": 9009,
            "text": "My mother walked to the park.",
            "target": (10, 16),
            "fes": [("Self_mover", 0, 9, "NP"), ("Goal", 17, 28, "PP")],
        }
    ],
}

# fulltext documents: (corpus name, doc name, doc id, sentences)
FULLTEXT_DOCS = [
    (
        "ANC",
        "MiniDoc",
        7001,
        [
            {
                "id": 9101,
                "text": "The boys ran home.",
                "annotations": [
                    {
                        "lu": 2001,
                        "target": (9, 12),
                        "fes": [("Self_mover", 0, 8, "NP"), ("Goal", 13, 17, "NP")],
                    },
                    {"lu": 5001, "target": (13, 17), "fes": []},
                ],
            },
            {
                "id": 9102,
                "text": "Matilda walked to the park.",
                "annotations": [
                    {
                        "lu": 2002,
                        "target": (8, 14),
                        "fes": [("Self_mover", 0, 7, "NP"), ("Goal", 15, 26, "PP")],
                    }
                ],
            },
        ],
    ),
    (
        "PropBank",
        "TinyDoc",
        7002,
        [
            {
                "id": 9103,
                "text": "They ran to the station.",
                "annotations": [
                    {
                        "lu": 2001,
                        "target": (5, 8),
                        "fes": [("Self_mover", 0, 4, "NP"), ("Goal", 9, 23, "PP")],
                    }
                ],
            }
        ],
    ),
    (
        "NTI",
        "TrainDoc",
        7003,
        [
            {
                "id": 9104,
                "text": "She knew the answer by heart.",
                "annotations": [
                    {
                        "lu": 1001,
                        "target": (4, 8),
                        "fes": [("Cognizer", 0, 3, "NP"), ("Content", 9, 19, "NP")],
                    }
                ],
            }
        ],
    ),
]

# (relation type name, parent frame, child frame, [(parent fe, child fe)])
RELATIONS = [
    ("Inheritance", 1, 2, [(101, 201)]),
    ("Inheritance", 1, 4, [(101, 401)]),
    ("Using", 2, 4, [(202, 403)]),
]

FE_EDGE_COUNT = sum(len(r[3]) for r in RELATIONS)

SPLIT_CONFIG = {
    "dev": ["ANC__MiniDoc"],
    "test": ["PropBank__TinyDoc"],
    "train": ["NTI__TrainDoc"],
    "lexicographic_split": "train",
}


def _write(root_el: ET.Element, path: Path) -> None:
    ET.indent(root_el)
    path.write_text(
        '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root_el, encoding="unicode"),
        encoding="utf-8",
    )


def _fe_name_to_id(frame_id: int, name: str) -> int:
    for fe_id, fe_name, _ in FRAMES[frame_id][1]:
        if fe_name == name:
            return fe_id
    raise KeyError(f"{name} not in frame {frame_id}")


def _annotation_set(parent: ET.Element, ann_id: int, lu_id: int | None, frame_id: int,
                    target, fes, ini_fes=(), junk_rank2=False) -> None:
    attrs = {"ID": str(ann_id), "status": "MANUAL"}
    if lu_id is not None:
        label, fid, _ = LUS[lu_id]
        attrs.update(
            {
                "luID": str(lu_id),
                "luName": label,
                "frameID": str(fid),
                "frameName": FRAMES[fid][0],
            }
        )
    ann = ET.SubElement(parent, "annotationSet", attrs)
    target_layer = ET.SubElement(ann, "layer", {"rank": "1", "name": "Target"})
    ET.SubElement(
        target_layer,
        "label",
        {"start": str(target[0]), "end": str(target[1] - 1), "name": "Target"},
    )
    fe_layer = ET.SubElement(ann, "layer", {"rank": "1", "name": "FE"})
    pt_layer = ET.SubElement(ann, "layer", {"rank": "1", "name": "PT"})
    gf_layer = ET.SubElement(ann, "layer", {"rank": "1", "name": "GF"})
    for name, start, end, pt in fes:
        common = {"start": str(start), "end": str(end - 1)}
        ET.SubElement(
            fe_layer,
            "label",
            {**common, "name": name, "feID": str(_fe_name_to_id(frame_id, name))},
        )
        ET.SubElement(pt_layer, "label", {**common, "name": pt})
        ET.SubElement(gf_layer, "label", {**common, "name": "Dep"})
    for name in ini_fes:
        ET.SubElement(
            fe_layer,
            "label",
            {"name": name, "itype": "INI", "feID": str(_fe_name_to_id(frame_id, name))},
        )
    if junk_rank2:
        extra = ET.SubElement(ann, "layer", {"rank": "2", "name": "FE"})
        ET.SubElement(extra, "label", {"start": "0", "end": "1", "name": "Time"})


def write_mini_release(root: Path) -> Path:
    """Write the miniature release under ``root``; returns the release dir."""
    release = root / "release"
    (release / "frame").mkdir(parents=True)
    (release / "lu").mkdir()
    (release / "fulltext").mkdir()

    # frameIndex.xml (presence only; the loader reads frame/*.xml)
    index = ET.Element("frameIndex", {"xmlns": XMLNS})
    for frame_id, (name, _) in sorted(FRAMES.items()):
        ET.SubElement(index, "frame", {"ID": str(frame_id), "name": name})
    _write(index, release / "frameIndex.xml")

    # frame/*.xml
    for frame_id, (name, fes) in FRAMES.items():
        frame_el = ET.Element("frame", {"xmlns": XMLNS, "ID": str(frame_id), "name": name})
        ET.SubElement(frame_el, "definition").text = f"Synthetic frame {name}."
        for fe_id, fe_name, coreness in fes:
            fe_el = ET.SubElement(
                frame_el,
                "FE",
                {"ID": str(fe_id), "name": fe_name, "coreType": coreness, "abbrev": fe_name[:3]},
            )
            ET.SubElement(fe_el, "definition").text = f"Synthetic FE {fe_name}."
        for lu_id, (label, fid, ann_count) in LUS.items():
            if fid != frame_id:
                continue
            lu_el = ET.SubElement(
                frame_el,
                "lexUnit",
                {
                    "ID": str(lu_id),
                    "name": label,
                    "POS": label.rsplit(".", 1)[1].upper(),
                    "status": "Finished_Initial",
                },
            )
            ET.SubElement(
                lu_el,
                "sentenceCount",
                {"annotated": str(ann_count), "total": str(ann_count)},
            )
            ET.SubElement(
                lu_el,
                "lexeme",
                {"order": "1", "headword": "false", "POS": label.rsplit(".", 1)[1].upper(),
                 "name": label.rsplit(".", 1)[0]},
            )
        _write(frame_el, release / "frame" / f"{name}.xml")

    # luIndex.xml
    lu_index = ET.Element("luIndex", {"xmlns": XMLNS})
    for lu_id, (label, fid, ann_count) in sorted(LUS.items()):
        ET.SubElement(
            lu_index,
            "lu",
            {
                "ID": str(lu_id),
                "name": label,
                "frameID": str(fid),
                "frameName": FRAMES[fid][0],
                "hasAnnotation": "true" if ann_count > 0 else "false",
            },
        )
    _write(lu_index, release / "luIndex.xml")

    # lu/*.xml
    ann_counter = 20000
    for lu_id, sentences in LU_SENTENCES.items():
        label, fid, _ = LUS[lu_id]
        lu_el = ET.Element(
            "lexUnit",
            {
                "xmlns": XMLNS,
                "ID": str(lu_id),
                "name": label,
                "POS": label.rsplit(".", 1)[1].upper(),
                "frame": FRAMES[fid][0],
                "frameID": str(fid),
                "status": "Finished_Initial",
            },
        )
        sub = ET.SubElement(lu_el, "subCorpus", {"name": "manually-added"})
        for sent in sentences:
            sent_el = ET.SubElement(sub, "sentence", {"ID": str(sent["id"]), "sentNo": "0"})
            ET.SubElement(sent_el, "text").text = sent["text"]
            ann_counter += 1
            _annotation_set(
                sent_el,
                ann_counter,
                None,
                fid,
                sent["target"],
                sent["fes"],
                ini_fes=sent.get("ini_fes", ()),
                junk_rank2=sent.get("junk_rank2", False),
            )
        _write(lu_el, release / "lu" / f"lu{lu_id}.xml")

    # fulltext/*.xml
    for corpus_name, doc_name, doc_id, sentences in FULLTEXT_DOCS:
        ft = ET.Element("fullTextAnnotation", {"xmlns": XMLNS})
        header = ET.SubElement(ft, "header")
        corpus_el = ET.SubElement(
            header, "corpus", {"name": corpus_name, "ID": str(doc_id * 10)}
        )
        ET.SubElement(corpus_el, "document", {"name": doc_name, "ID": str(doc_id)})
        for sent in sentences:
            sent_el = ET.SubElement(
                ft, "sentence", {"ID": str(sent["id"]), "docID": str(doc_id)}
            )
            ET.SubElement(sent_el, "text").text = sent["text"]
            # leading UNANN POS annotation set, as in real documents
            unann = ET.SubElement(
                sent_el, "annotationSet", {"ID": str(sent["id"] * 10), "status": "UNANN"}
            )
            penn = ET.SubElement(unann, "layer", {"rank": "1", "name": "PENN"})
            pos = 0
            for word in sent["text"].split():
                ET.SubElement(
                    penn,
                    "label",
                    {"start": str(pos), "end": str(pos + len(word) - 1), "name": "nn"},
                )
                pos += len(word) + 1
            for k, ann in enumerate(sent["annotations"]):
                ann_counter += 1
                _annotation_set(
                    sent_el,
                    ann_counter,
                    ann["lu"],
                    LUS[ann["lu"]][1],
                    ann["target"],
                    ann["fes"],
                )
        _write(ft, release / "fulltext" / f"{corpus_name}__{doc_name}.xml")

    # frRelation.xml
    relations = ET.Element("frameRelations", {"xmlns": XMLNS})
    rel_id = 1
    grouped: dict[str, list] = {}
    for type_name, sup, sub, fe_pairs in RELATIONS:
        grouped.setdefault(type_name, []).append((sup, sub, fe_pairs))
    for type_id, (type_name, rels) in enumerate(sorted(grouped.items()), start=1):
        type_el = ET.SubElement(
            relations, "frameRelationType", {"ID": str(type_id), "name": type_name}
        )
        for sup, sub, fe_pairs in rels:
            rel_id += 1
            rel_el = ET.SubElement(
                type_el,
                "frameRelation",
                {
                    "ID": str(rel_id),
                    "supID": str(sup),
                    "subID": str(sub),
                    "superFrameName": FRAMES[sup][0],
                    "subFrameName": FRAMES[sub][0],
                },
            )
            for sup_fe, sub_fe in fe_pairs:
                rel_id += 1
                ET.SubElement(
                    rel_el,
                    "FERelation",
                    {"ID": str(rel_id), "supID": str(sup_fe), "subID": str(sub_fe)},
                )
    _write(relations, release / "frRelation.xml")
    return release
