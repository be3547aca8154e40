"""Small rule-based English inflection for lemma replacement.

Covers the surface-form classes needed when swapping one lemma for another:
verb base/3sg/past/past-participle/gerund and noun singular/plural. Regular
rules plus an override table for common irregulars; callers fall back to the
bare lemma when a form cannot be resolved.
"""
from __future__ import annotations

VOWELS = "aeiou"

# lemma -> (3sg, past, past participle, gerund); None slots follow regular rules
IRREGULAR_VERBS: dict[str, tuple[str | None, str | None, str | None, str | None]] = {
    "be": ("is", "was", "been", "being"),
    "have": ("has", "had", "had", "having"),
    "do": ("does", "did", "done", "doing"),
    "go": ("goes", "went", "gone", "going"),
    "say": (None, "said", "said", None),
    "make": (None, "made", "made", None),
    "take": (None, "took", "taken", None),
    "get": (None, "got", "gotten", "getting"),
    "give": (None, "gave", "given", None),
    "come": (None, "came", "come", "coming"),
    "see": (None, "saw", "seen", "seeing"),
    "know": (None, "knew", "known", None),
    "think": (None, "thought", "thought", None),
    "tell": (None, "told", "told", None),
    "find": (None, "found", "found", None),
    "leave": (None, "left", "left", None),
    "feel": (None, "felt", "felt", None),
    "bring": (None, "brought", "brought", None),
    "begin": (None, "began", "begun", "beginning"),
    "keep": (None, "kept", "kept", None),
    "hold": (None, "held", "held", None),
    "write": (None, "wrote", "written", None),
    "stand": (None, "stood", "stood", None),
    "hear": (None, "heard", "heard", None),
    "let": (None, "let", "let", "letting"),
    "mean": (None, "meant", "meant", None),
    "set": (None, "set", "set", "setting"),
    "meet": (None, "met", "met", None),
    "run": (None, "ran", "run", "running"),
    "pay": (None, "paid", "paid", None),
    "sit": (None, "sat", "sat", "sitting"),
    "speak": (None, "spoke", "spoken", None),
    "lie": (None, "lay", "lain", "lying"),
    "lead": (None, "led", "led", None),
    "read": (None, "read", "read", None),
    "grow": (None, "grew", "grown", None),
    "lose": (None, "lost", "lost", None),
    "fall": (None, "fell", "fallen", None),
    "send": (None, "sent", "sent", None),
    "build": (None, "built", "built", None),
    "understand": (None, "understood", "understood", None),
    "draw": (None, "drew", "drawn", None),
    "break": (None, "broke", "broken", None),
    "spend": (None, "spent", "spent", None),
    "cut": (None, "cut", "cut", "cutting"),
    "rise": (None, "rose", "risen", "rising"),
    "drive": (None, "drove", "driven", "driving"),
    "buy": (None, "bought", "bought", None),
    "wear": (None, "wore", "worn", None),
    "choose": (None, "chose", "chosen", "choosing"),
    "eat": (None, "ate", "eaten", None),
    "put": (None, "put", "put", "putting"),
    "teach": (None, "taught", "taught", None),
    "catch": (None, "caught", "caught", None),
    "fight": (None, "fought", "fought", None),
    "seek": (None, "sought", "sought", None),
    "sell": (None, "sold", "sold", None),
    "throw": (None, "threw", "thrown", None),
    "fly": (None, "flew", "flown", None),
    "swim": (None, "swam", "swum", "swimming"),
    "sing": (None, "sang", "sung", None),
    "ring": (None, "rang", "rung", None),
    "drink": (None, "drank", "drunk", None),
    "win": (None, "won", "won", "winning"),
    "sleep": (None, "slept", "slept", None),
    "stick": (None, "stuck", "stuck", None),
    "strike": (None, "struck", "struck", "striking"),
    "hang": (None, "hung", "hung", None),
    "shake": (None, "shook", "shaken", None),
    "hide": (None, "hid", "hidden", "hiding"),
    "bend": (None, "bent", "bent", None),
    "shoot": (None, "shot", "shot", None),
    "steal": (None, "stole", "stolen", None),
    "creep": (None, "crept", "crept", None),
    "hit": (None, "hit", "hit", "hitting"),
}

IRREGULAR_PLURALS = {
    "man": "men",
    "woman": "women",
    "child": "children",
    "person": "people",
    "foot": "feet",
    "tooth": "teeth",
    "mouse": "mice",
    "goose": "geese",
    "life": "lives",
    "wife": "wives",
    "knife": "knives",
    "leaf": "leaves",
    "half": "halves",
    "wolf": "wolves",
    "datum": "data",
    "criterion": "criteria",
}

VERB_FORMS = ("base", "3sg", "past", "pp", "gerund")


def _one_syllable(word: str) -> bool:
    groups = 0
    prev_vowel = False
    for ch in word:
        is_vowel = ch in VOWELS
        if is_vowel and not prev_vowel:
            groups += 1
        prev_vowel = is_vowel
    return groups <= 1


def _doubles_final(word: str) -> bool:
    if len(word) < 3:
        return False
    a, b, c = word[-3], word[-2], word[-1]
    return (
        c not in VOWELS
        and c not in "wxy"
        and b in VOWELS
        and a not in VOWELS
        and _one_syllable(word)
    )


def _regular_3sg(lemma: str) -> str:
    if lemma.endswith(("s", "x", "z", "ch", "sh", "o")):
        return lemma + "es"
    if lemma.endswith("y") and len(lemma) > 1 and lemma[-2] not in VOWELS:
        return lemma[:-1] + "ies"
    return lemma + "s"


def _regular_past(lemma: str) -> str:
    if lemma.endswith("e"):
        return lemma + "d"
    if lemma.endswith("y") and len(lemma) > 1 and lemma[-2] not in VOWELS:
        return lemma[:-1] + "ied"
    if _doubles_final(lemma):
        return lemma + lemma[-1] + "ed"
    return lemma + "ed"


def _regular_gerund(lemma: str) -> str:
    if lemma.endswith("ie"):
        return lemma[:-2] + "ying"
    if lemma.endswith("e") and not lemma.endswith(("ee", "oe", "ye")):
        return lemma[:-1] + "ing"
    if _doubles_final(lemma):
        return lemma + lemma[-1] + "ing"
    return lemma + "ing"


def verb_forms(lemma: str) -> dict[str, str]:
    """All five surface forms of a (single-word, lowercase) verb lemma."""
    irr = IRREGULAR_VERBS.get(lemma, (None, None, None, None))
    past = irr[1] or _regular_past(lemma)
    return {
        "base": lemma,
        "3sg": irr[0] or _regular_3sg(lemma),
        "past": past,
        "pp": irr[2] or past,
        "gerund": irr[3] or _regular_gerund(lemma),
    }


def detect_verb_form(token: str, lemma: str) -> str | None:
    """Which form class of ``lemma`` the token realizes, or None."""
    token = token.lower()
    forms = verb_forms(lemma)
    # past participle wins over past for -ed ambiguity only when they differ;
    # for regular verbs the two are identical strings anyway
    for form in VERB_FORMS:
        if forms[form] == token:
            return form
    return None


def inflect_verb(lemma: str, form: str) -> str:
    return verb_forms(lemma)[form]


def pluralize(noun: str) -> str:
    if noun in IRREGULAR_PLURALS:
        return IRREGULAR_PLURALS[noun]
    if noun.endswith(("s", "x", "z", "ch", "sh")):
        return noun + "es"
    if noun.endswith("y") and len(noun) > 1 and noun[-2] not in VOWELS:
        return noun[:-1] + "ies"
    return noun + "s"


def detect_noun_number(token: str, lemma: str) -> str | None:
    token = token.lower()
    if token == lemma:
        return "singular"
    if token == pluralize(lemma):
        return "plural"
    return None


def inflect_noun(lemma: str, number: str) -> str:
    return pluralize(lemma) if number == "plural" else lemma


def match_surface(donor_token: str, donor_lemma: str, target_lemma: str, pos: str) -> str | None:
    """Render ``target_lemma`` in the surface-form class of ``donor_token``.

    Multi-word lemmas inflect their head (first word). Returns None when the
    donor form cannot be detected; caller falls back to the bare lemma.
    """
    donor_head = donor_lemma.split()[0]
    target_words = target_lemma.split()
    target_head, target_rest = target_words[0], target_words[1:]

    donor_token_head = donor_token.split()[0] if donor_token else donor_token

    if pos == "v":
        form = detect_verb_form(donor_token_head, donor_head)
        if form is None:
            return None
        head = inflect_verb(target_head, form)
    elif pos == "n":
        number = detect_noun_number(donor_token_head, donor_head)
        if number is None:
            return None
        head = inflect_noun(target_head, number)
    else:
        head = target_head

    return " ".join([head, *target_rest])


def recase(rendered: str, donor_token: str) -> str:
    """Copy leading capitalization (and all-caps) from the donor token."""
    if not rendered or not donor_token:
        return rendered
    if donor_token.isupper() and len(donor_token) > 1:
        return rendered.upper()
    if donor_token[0].isupper():
        return rendered[0].upper() + rendered[1:]
    return rendered
