"""Ancestor closure, forbidden-ancestry checks, and sister-LU lookup."""
import pytest
from hypothesis import given, strategies as st

from framegen.lexicon import Coreness, Frame, FrameElement, Lexicon, LexiconError
from framegen.relations import (
    FeRelationEdge,
    FrameRelationEdge,
    RelationGraph,
    RelationType,
)


def _chain_lexicon(names, edges, relation_type=RelationType.INHERITANCE):
    """One frame per FE, FE ids = indices, edges as (parent idx, child idx)."""
    frames = [Frame(id=i, name=f"F{i}", definition="", fes=(i * 100,)) for i in range(len(names))]
    fes = [
        FrameElement(id=i * 100, frame=i, name=name, coreness=Coreness.CORE, definition="")
        for i, name in enumerate(names)
    ]
    rels = [
        FrameRelationEdge(
            relation_type=relation_type,
            parent_frame=p,
            child_frame=c,
            fe_edges=(FeRelationEdge(relation_type, p * 100, c * 100),),
        )
        for p, c in edges
    ]
    return Lexicon(frames, fes, [], frame_relations=rels)


def test_three_node_chain_closure():
    lex = _chain_lexicon(["A", "B", "C"], [(0, 1), (1, 2)])
    graph = RelationGraph(lex)
    assert graph.fe_ancestors(200) == {0, 100}
    assert graph.fe_ancestors(100) == {0}
    assert graph.fe_ancestors(0) == set()


def test_ancestors_terminate_on_cycles():
    lex = _chain_lexicon(["A", "B"], [(0, 1), (1, 0)])
    graph = RelationGraph(lex)
    assert graph.fe_ancestors(100) == {0}
    assert graph.fe_ancestors(0) == {100}  # excludes itself even in a cycle


def test_unknown_fe_errors(graph):
    with pytest.raises(LexiconError):
        graph.fe_ancestors(424242)
    with pytest.raises(LexiconError):
        graph.has_forbidden_ancestor(424242)


def test_cognizer_has_agent_ancestor(lexicon, graph):
    cognizer = lexicon.fe_named(lexicon.frame_named("Awareness").id, "Cognizer")
    ancestors = graph.fe_ancestors(cognizer.id)
    names = {lexicon.fe(a).name for a in ancestors}
    assert "Agent" in names
    assert graph.has_forbidden_ancestor(cognizer.id)


def test_forbidden_by_own_name(lexicon, graph):
    agent = lexicon.fe_named(lexicon.frame_named("Rewards_and_punishments").id, "Agent")
    self_mover = lexicon.fe_named(lexicon.frame_named("Self_motion").id, "Self_mover")
    assert graph.has_forbidden_ancestor(agent.id)
    assert graph.has_forbidden_ancestor(self_mover.id)


def test_evaluee_not_forbidden(lexicon, graph):
    evaluee = lexicon.fe_named(lexicon.frame_named("Rewards_and_punishments").id, "Evaluee")
    assert not graph.has_forbidden_ancestor(evaluee.id)


def test_name_normalization_spaces():
    lex = _chain_lexicon(["Self mover"], [])
    graph = RelationGraph(lex)
    assert graph.has_forbidden_ancestor(0)


def test_monotone_in_relation_types(lexicon, graph):
    reason = lexicon.fe_named(lexicon.frame_named("Rewards_and_punishments").id, "Reason")
    inh_only = graph.fe_ancestors(reason.id, frozenset({RelationType.INHERITANCE}))
    both = graph.fe_ancestors(
        reason.id, frozenset({RelationType.INHERITANCE, RelationType.USING})
    )
    assert inh_only <= both
    # the Using edge Content -> Reason only appears with the larger set
    content = lexicon.fe_named(lexicon.frame_named("Awareness").id, "Content")
    assert content.id in both
    assert content.id not in inh_only


@given(
    edges=st.lists(
        st.tuples(st.integers(0, 9), st.integers(0, 9)), max_size=15, unique=True
    ),
    fe=st.integers(0, 9),
)
def test_forbidden_propagates_to_descendants(edges, fe):
    """Every FE that can reach the forbidden root has a forbidden ancestor."""
    names = ["Agent"] + [f"Role{i}" for i in range(1, 10)]
    lex = _chain_lexicon(names, edges)
    graph = RelationGraph(lex)
    reaches_root = 0 in graph.fe_ancestors(fe * 100)
    if reaches_root or fe == 0:
        assert graph.has_forbidden_ancestor(fe * 100)


def test_hypothesis_monotonicity_subset():
    lex = _chain_lexicon(
        ["A", "B", "C", "D"],
        [(0, 1), (1, 2), (2, 3)],
        relation_type=RelationType.USING,
    )
    graph = RelationGraph(lex)
    assert graph.fe_ancestors(300, frozenset()) == set()
    assert graph.fe_ancestors(300, frozenset({RelationType.USING})) == {0, 100, 200}


def test_sister_lus_for_reward(lexicon, graph):
    reward = lexicon.lus_labeled("reward.v")[0]
    sisters = graph.sister_lus(reward.id)
    labels = [lexicon.lu(s).label for s in sisters]
    assert "discipline.v" in labels
    # ordered by annotation count: discipline has 2, punish 1
    assert labels.index("discipline.v") < labels.index("punish.v")
    # the target itself and unannotated LUs are excluded
    assert "reward.v" not in labels


def test_sister_lus_king(lexicon, graph):
    king = lexicon.lus_labeled("king.n")[0]
    labels = [lexicon.lu(s).label for s in graph.sister_lus(king.id)]
    assert labels == ["rector.n"]


def test_sister_lus_lonely(lexicon, graph):
    home = lexicon.lus_labeled("home.n")[0]
    assert graph.sister_lus(home.id) == []


def test_sister_symmetry_on_annotated_pairs(lexicon, graph):
    annotated = [lu for lu in lexicon.lus.values() if lu.has_annotations]
    for a in annotated:
        for b_id in graph.sister_lus(a.id):
            b = lexicon.lu(b_id)
            if b.has_annotations:
                assert a.id in graph.sister_lus(b.id)


def test_unknown_lu_errors(graph):
    with pytest.raises(LexiconError):
        graph.sister_lus(999999)


def test_dump_edges_jsonl(tmp_path, graph):
    path = tmp_path / "edges.jsonl"
    n = graph.dump_edges_jsonl(path)
    assert n == graph.fe_edge_count
    assert len(path.read_text(encoding="utf-8").splitlines()) == n
