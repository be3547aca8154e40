"""Candidate selection, LU replacement with inflection, and mask rendering."""
import pytest
from hypothesis import given, strategies as st

from framegen import inflect
from framegen.expand import (
    CandidateConfig,
    CandidateSelector,
    ConditioningMode,
    NothingToGenerate,
    ReplacementError,
    ReplacementSkip,
    build_masked,
    maskable_spans,
    replace_lu,
)
from framegen.lexicon import AnnotatedSentence, FeSpan, Source, Span


def _sentence(corpus, sid):
    for s in corpus.lexicographic:
        if s.sentence_id == sid:
            return s
    raise KeyError(sid)


def _fig_sentence(corpus):
    return _sentence(corpus, 9002)


# -- selection -----------------------------------------------------------------

def test_candidates_fig_sentence(lexicon, corpus, selector):
    sent = _fig_sentence(corpus)
    chosen = selector(sent)
    names = [lexicon.fe(fs.fe).name for fs in chosen]
    assert names == ["Evaluee", "Reason"]  # left-to-right, Time excluded


def test_candidates_empty_sentence(lexicon, corpus, selector):
    sent = _sentence(corpus, 9005)  # king.n, no FE spans
    assert selector(sent) == []


def test_agent_span_excluded_unless_pp(lexicon, corpus, selector):
    sent = _sentence(corpus, 9004)  # punish.v with an Agent NP span
    names = [lexicon.fe(fs.fe).name for fs in selector(sent)]
    assert "Agent" not in names
    assert names == ["Evaluee", "Reason"]


def test_self_mover_excluded_by_hand_traced_closure(lexicon, corpus, graph, selector):
    # Self_mover is forbidden by its own name; the fixture relation file holds
    # no edge into it, so the hand-traced closure is empty and the name rule
    # alone must exclude it.
    sent = _sentence(corpus, 9009)  # walk.v lexicographic
    self_mover = lexicon.fe_named(lexicon.frame_named("Self_motion").id, "Self_mover")
    assert graph.fe_ancestors(self_mover.id) == set()
    names = [lexicon.fe(fs.fe).name for fs in selector(sent)]
    assert names == ["Goal"]


def test_cognizer_excluded_via_inherited_agent(lexicon, corpus, selector):
    # Cognizer itself is not a forbidden name; its exclusion must come from
    # the Inheritance edge Agent -> Cognizer written in the fixture.
    sent = _sentence(corpus, 9001)
    names = [lexicon.fe(fs.fe).name for fs in selector(sent)]
    assert names == ["Content"]


def test_forbidden_core_pp_span_is_still_candidate(lexicon, graph):
    # An Agent span realized as a PP satisfies the phrase-type criterion.
    frame = lexicon.frame_named("Rewards_and_punishments")
    agent = lexicon.fe_named(frame.id, "Agent")
    sent = AnnotatedSentence(
        sentence_id=1,
        text="He was punished by the court.",
        lu=lexicon.lus_labeled("punish.v")[0].id,
        target_spans=(Span(7, 15),),
        fe_spans=(FeSpan(fe=agent.id, span=Span(16, 28), phrase_type="PP"),),
        source=Source.LEXICOGRAPHIC,
    )
    chosen = CandidateSelector(lexicon, graph)(sent)
    assert [fs.fe for fs in chosen] == [agent.id]


def test_core_unexpressed_flag(lexicon, graph, corpus):
    # with the flag off (default) only Core counts; flag widens the core set
    config = CandidateConfig(include_core_unexpressed=True)
    widened = CandidateSelector(lexicon, graph, config)
    default = CandidateSelector(lexicon, graph)
    sent = _fig_sentence(corpus)
    assert {f.fe for f in default(sent)} <= {f.fe for f in widened(sent)}


def test_candidate_subset_property(lexicon, corpus, selector, graph):
    from framegen.lexicon import Coreness, explode_fulltext

    for sent in explode_fulltext(corpus):
        for fs in selector(sent):
            fe = lexicon.fe(fs.fe)
            assert fe.coreness is Coreness.CORE
            if fs.phrase_type not in ("PP",):
                assert not graph.has_forbidden_ancestor(fe.id)


# -- replacement -----------------------------------------------------------------

def test_replace_fig_sentence(lexicon, corpus):
    donor = _fig_sentence(corpus)
    reward = lexicon.lus_labeled("reward.v")[0]
    instance = replace_lu(donor, reward.id, lexicon)
    assert instance.text == "Growing up, boys are rewarded for breaking the rules."
    assert instance.target_spans[0].slice(instance.text) == "rewarded"
    # FE labels unchanged, spans still point at the same substrings
    by_name = {
        lexicon.fe(fs.fe).name: fs.span.slice(instance.text) for fs in instance.fe_spans
    }
    assert by_name == {
        "Time": "Growing up",
        "Evaluee": "boys",
        "Reason": "for breaking the rules",
    }


def test_replace_identity(lexicon, corpus):
    donor = _fig_sentence(corpus)
    instance = replace_lu(donor, donor.lu, lexicon)
    assert instance.text == donor.text


def test_replace_king_rector(lexicon, corpus):
    donor = _sentence(corpus, 9005)
    rector = lexicon.lus_labeled("rector.n")[0]
    instance = replace_lu(donor, rector.id, lexicon)
    assert instance.text == "No prior Scottish rector claimed his minority ended at this age."


def test_replace_reverts_to_donor(lexicon, corpus):
    donor = _fig_sentence(corpus)
    reward = lexicon.lus_labeled("reward.v")[0]
    instance = replace_lu(donor, reward.id, lexicon)
    span = instance.target_spans[0]
    donor_token = donor.target_spans[0].slice(donor.text)
    reverted = instance.text[: span.start] + donor_token + instance.text[span.end :]
    assert reverted == donor.text


def test_replace_frame_mismatch(lexicon, corpus):
    donor = _fig_sentence(corpus)
    walk = lexicon.lus_labeled("walk.v")[0]
    with pytest.raises(ReplacementError):
        replace_lu(donor, walk.id, lexicon)


def test_replace_pos_mismatch(lexicon, corpus):
    donor = _sentence(corpus, 9005)  # king.n
    # same frame, different POS: synthesize a verb LU in Leadership
    from framegen.lexicon import LexicalUnit, Lexicon, Pos

    leadership = lexicon.frame_named("Leadership")
    fake = LexicalUnit(id=777, frame=leadership.id, lemma="lead", pos=Pos.V, has_annotations=False)
    extended = Lexicon(
        lexicon.frames.values(),
        lexicon.fes.values(),
        list(lexicon.lus.values()) + [fake],
        lexicon.frame_relations,
    )
    with pytest.raises(ReplacementError, match="POS"):
        replace_lu(donor, 777, extended)


def test_replace_multi_span_target_skips(lexicon, corpus):
    donor = _fig_sentence(corpus)
    split_target = AnnotatedSentence(
        sentence_id=donor.sentence_id,
        text=donor.text,
        lu=donor.lu,
        target_spans=(Span(21, 32), Span(33, 36)),
        fe_spans=(),
        source=donor.source,
    )
    reward = lexicon.lus_labeled("reward.v")[0]
    with pytest.raises(ReplacementSkip):
        replace_lu(split_target, reward.id, lexicon)


def test_replacement_shifts_offsets(lexicon, corpus):
    donor = _sentence(corpus, 9004)  # "The teacher punished the students for cheating."
    discipline = lexicon.lus_labeled("discipline.v")[0]
    instance = replace_lu(donor, discipline.id, lexicon)
    assert instance.text == "The teacher disciplined the students for cheating."
    for fs, name in zip(instance.fe_spans, ("The teacher", "the students", "for cheating")):
        assert fs.span.slice(instance.text) == name


def test_verb_inflection_table():
    cases = [
        ("disciplined", "discipline", "reward", "rewarded"),
        ("disciplines", "discipline", "reward", "rewards"),
        ("disciplining", "discipline", "reward", "rewarding"),
        ("discipline", "discipline", "reward", "reward"),
        ("ran", "run", "walk", "walked"),
        ("walked", "walk", "run", "ran"),
        ("knows", "know", "presume", "presumes"),
        ("knew", "know", "presume", "presumed"),
        ("took place", "take place", "happen", "happened"),
    ]
    for token, donor_lemma, target_lemma, expected in cases:
        assert inflect.match_surface(token, donor_lemma, target_lemma, "v") == expected


def test_multiword_target_inflects_head():
    assert inflect.match_surface("happens", "happen", "take place", "v") == "takes place"
    assert inflect.match_surface("happened", "happen", "take place", "v") == "took place"


def test_noun_number_matching():
    assert inflect.match_surface("claws", "claw", "back", "n") == "backs"
    assert inflect.match_surface("claw", "claw", "back", "n") == "back"
    assert inflect.match_surface("men", "man", "woman", "n") == "women"


def test_unresolvable_form_falls_back_to_lemma(lexicon, corpus, caplog):
    donor = _fig_sentence(corpus)
    mangled = AnnotatedSentence(
        sentence_id=donor.sentence_id,
        text="Growing up, boys are disciplinning for breaking the rules.",
        lu=donor.lu,
        target_spans=(Span(21, 34),),
        fe_spans=(),
        source=donor.source,
    )
    reward = lexicon.lus_labeled("reward.v")[0]
    import logging

    with caplog.at_level(logging.WARNING):
        instance = replace_lu(mangled, reward.id, lexicon)
    assert instance.target_spans[0].slice(instance.text) == "reward"
    assert any("bare lemma" in r.message for r in caplog.records)


def test_recase_preserved(lexicon, corpus):
    donor = _sentence(corpus, 9004)
    capitalized = AnnotatedSentence(
        sentence_id=donor.sentence_id,
        text="Punished again, the students left.",
        lu=donor.lu,
        target_spans=(Span(0, 8),),
        fe_spans=(),
        source=donor.source,
    )
    discipline = lexicon.lus_labeled("discipline.v")[0]
    instance = replace_lu(capitalized, discipline.id, lexicon)
    assert instance.text.startswith("Disciplined again")


# -- masking ----------------------------------------------------------------------

def _fig_masked(lexicon, corpus, selector, mode):
    donor = _fig_sentence(corpus)
    reward = lexicon.lus_labeled("reward.v")[0]
    instance = replace_lu(donor, reward.id, lexicon)
    candidates = selector.select_spans(instance.fe_spans)
    return build_masked(instance, candidates, mode, lexicon)


def test_masked_surface_fe_mode(lexicon, corpus, selector):
    masked = _fig_masked(lexicon, corpus, selector, ConditioningMode.FE)
    assert masked.surface == (
        "Growing up, <FE: Evaluee> <mask> </FE: Evaluee> are rewarded "
        "<FE: Reason> <mask> </FE: Reason>."
    )


def test_masked_surface_none_mode(lexicon, corpus, selector):
    masked = _fig_masked(lexicon, corpus, selector, ConditioningMode.NONE)
    assert masked.surface == "Growing up, <mask> are rewarded <mask>."
    assert masked.bare_surface == masked.surface


def test_masked_surface_frame_fe_mode(lexicon, corpus, selector):
    masked = _fig_masked(lexicon, corpus, selector, ConditioningMode.FRAME_FE)
    tag_open = "<Frame: Rewards_and_punishments + FE: Evaluee>"
    assert masked.surface.startswith(f"Growing up, {tag_open} <mask> </Frame:")
    assert masked.surface.count("<mask>") == 2


def test_masked_reconstruction(lexicon, corpus, selector):
    masked = _fig_masked(lexicon, corpus, selector, ConditioningMode.FE)
    segments = masked.segments
    fills = masked.original_fills
    rebuilt = segments[0]
    for fill, seg in zip(fills, segments[1:]):
        rebuilt += fill + seg
    assert rebuilt == masked.text


def test_masked_placeholder_count(lexicon, corpus, selector):
    masked = _fig_masked(lexicon, corpus, selector, ConditioningMode.NONE)
    assert masked.surface.count("<mask>") == len(masked.masked_slots) == 2


def test_single_candidate_single_placeholder(lexicon, corpus, selector):
    donor = _sentence(corpus, 9001)  # know.v: only Content survives selection
    presume = lexicon.lus_labeled("presume.v")[0]
    instance = replace_lu(donor, presume.id, lexicon)
    masked = build_masked(
        instance, selector.select_spans(instance.fe_spans), ConditioningMode.NONE, lexicon
    )
    assert masked.surface.count("<mask>") == 1


def test_build_masked_requires_candidates(lexicon, corpus):
    donor = _sentence(corpus, 9005)
    rector = lexicon.lus_labeled("rector.n")[0]
    instance = replace_lu(donor, rector.id, lexicon)
    with pytest.raises(NothingToGenerate, match="nothing to generate"):
        build_masked(instance, [], ConditioningMode.NONE, lexicon)


def test_maskable_excludes_target_overlap(lexicon):
    spans = [
        FeSpan(fe=402, span=Span(0, 10), phrase_type="NP"),
        FeSpan(fe=403, span=Span(12, 20), phrase_type="PP"),
    ]
    kept = maskable_spans(spans, [Span(5, 8)])
    assert [fs.fe for fs in kept] == [403]


def test_masked_round_trip_dict(lexicon, corpus, selector):
    masked = _fig_masked(lexicon, corpus, selector, ConditioningMode.FRAME_FE)
    from framegen.expand import MaskedInstance

    clone = MaskedInstance.from_dict(masked.to_dict())
    assert clone == masked


@given(st.data())
def test_span_shift_arithmetic(data):
    """Replacing a span and shifting the rest keeps non-overlapping text."""
    from framegen.expand import _shift_span

    cut = Span(5, 10)
    delta = data.draw(st.integers(-4, 6))
    before = data.draw(st.integers(0, 4))
    assert _shift_span(Span(before, 5), cut, delta) == Span(before, 5)
    after_start = data.draw(st.integers(10, 20))
    shifted = _shift_span(Span(after_start, after_start + 3), cut, delta)
    assert shifted.start == after_start + delta
    outer = _shift_span(Span(2, 15), cut, delta)
    assert outer == Span(2, 15 + delta)
    with pytest.raises(ValueError):
        _shift_span(Span(7, 12), cut, delta)
