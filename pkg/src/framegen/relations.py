"""Typed frame-to-frame and FE-to-FE relation edges with ancestor queries
and sister-LU lookup."""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Iterable

from .lexicon import FeId, FrameId, Lexicon, LuId


class RelationType(Enum):
    INHERITANCE = "Inheritance"
    USING = "Using"
    SUBFRAME = "SubFrame"
    PERSPECTIVE_ON = "PerspectiveOn"
    PRECEDES = "Precedes"
    CAUSATIVE_OF = "CausativeOf"
    INCHOATIVE_OF = "InchoativeOf"
    SEE_ALSO = "SeeAlso"
    METAPHORICALLY_BASED = "MetaphoricallyBased"


# Release-file spellings of the relation type names.
RELEASE_RELATION_NAMES = {
    "Inheritance": RelationType.INHERITANCE,
    "Using": RelationType.USING,
    "Subframe": RelationType.SUBFRAME,
    "Perspective_on": RelationType.PERSPECTIVE_ON,
    "Precedes": RelationType.PRECEDES,
    "Causative_of": RelationType.CAUSATIVE_OF,
    "Inchoative_of": RelationType.INCHOATIVE_OF,
    "See_also": RelationType.SEE_ALSO,
    "ReFraming_Mapping": RelationType.METAPHORICALLY_BASED,
    "Metaphor": RelationType.METAPHORICALLY_BASED,
}

DEFAULT_ANCESTOR_RELATIONS: FrozenSet[RelationType] = frozenset({RelationType.INHERITANCE})

# FE names whose ancestry disqualifies a span from regeneration.
FORBIDDEN_FE_NAMES = frozenset({"Agent", "Self_mover"})


@dataclass(frozen=True)
class FeRelationEdge:
    relation_type: RelationType
    parent_fe: FeId
    child_fe: FeId


@dataclass(frozen=True)
class FrameRelationEdge:
    relation_type: RelationType
    parent_frame: FrameId
    child_frame: FrameId
    fe_edges: tuple[FeRelationEdge, ...] = ()


def _normalize_fe_name(name: str) -> str:
    return name.replace(" ", "_")


class RelationGraph:
    """Read-only queries over a lexicon's FE relation edges."""

    def __init__(
        self,
        lexicon: Lexicon,
        ancestor_relations: Iterable[RelationType] = DEFAULT_ANCESTOR_RELATIONS,
    ) -> None:
        self.lexicon = lexicon
        self.ancestor_relations = frozenset(ancestor_relations)
        # child FE -> [(relation type, parent FE)]
        self._parents: dict[FeId, list[tuple[RelationType, FeId]]] = {}
        self._fe_edge_count = 0
        for frel in lexicon.frame_relations:
            for edge in frel.fe_edges:
                self._parents.setdefault(edge.child_fe, []).append(
                    (edge.relation_type, edge.parent_fe)
                )
                self._fe_edge_count += 1

    @property
    def fe_edge_count(self) -> int:
        return self._fe_edge_count

    def fe_ancestors(
        self, fe: FeId, relation_types: FrozenSet[RelationType] | None = None
    ) -> set[FeId]:
        """Transitive closure upward (child to parent) over edges of the given
        types. Excludes ``fe`` itself; cycles terminate via the visited set."""
        self.lexicon.fe(fe)  # raises on unknown id
        types = self.ancestor_relations if relation_types is None else frozenset(relation_types)
        out: set[FeId] = set()
        stack = [fe]
        seen = {fe}
        while stack:
            node = stack.pop()
            for rel_type, parent in self._parents.get(node, ()):
                if rel_type not in types:
                    continue
                if parent in seen:
                    continue
                seen.add(parent)
                out.add(parent)
                stack.append(parent)
        out.discard(fe)
        return out

    def has_forbidden_ancestor(
        self, fe: FeId, relation_types: FrozenSet[RelationType] | None = None
    ) -> bool:
        """True iff the FE itself, or any ancestor, is named Agent or Self_mover
        (after space/underscore normalization)."""
        name = _normalize_fe_name(self.lexicon.fe(fe).name)
        if name in FORBIDDEN_FE_NAMES:
            return True
        for anc in self.fe_ancestors(fe, relation_types):
            if _normalize_fe_name(self.lexicon.fe(anc).name) in FORBIDDEN_FE_NAMES:
                return True
        return False

    def sister_lus(self, target: LuId) -> list[LuId]:
        """Annotated LUs sharing the target's frame and POS, excluding the
        target, ordered by descending annotation count (ties by id)."""
        lu = self.lexicon.lu(target)
        sisters = [
            other
            for other in self.lexicon.frame_lus(lu.frame)
            if other.id != lu.id and other.pos is lu.pos and other.has_annotations
        ]
        sisters.sort(key=lambda o: (-o.annotation_count, o.id))
        return [o.id for o in sisters]

    def dump_edges_jsonl(self, path) -> int:
        """Write one FE edge per line for inspection. Returns edge count."""
        n = 0
        with open(path, "w", encoding="utf-8") as fh:
            for frel in self.lexicon.frame_relations:
                for edge in frel.fe_edges:
                    fh.write(
                        json.dumps(
                            {
                                "relation_type": edge.relation_type.value,
                                "parent_frame": frel.parent_frame,
                                "child_frame": frel.child_frame,
                                "parent_fe": edge.parent_fe,
                                "child_fe": edge.child_fe,
                            },
                            ensure_ascii=False,
                        )
                        + "\n"
                    )
                    n += 1
        return n
