from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tashkeel.codec import COMBOS, DiacritizedWord, decompose, foreign_word
from tashkeel.corpus import Lexicon
from tashkeel.postcorrect import CorrectionPolicy, core_form_counts, post_correct

LEX = Lexicon({"ktAb": Counter({"kitaAb": 2, "kut~aAb": 1})})


def fix(text, lex=LEX, **kw):
    word = decompose(text)
    return post_correct(word.bare, word, lex, **kw).text


def test_unseen_form_replaced_by_most_frequent():
    assert fix("kutaAb") == "kitaAb"


def test_seen_form_unchanged():
    assert fix("kut~aAb") == "kut~aAb"


def test_unseen_word_unchanged():
    assert fix("qalamN") == "qalamN"


def test_disabled_policy_is_raw():
    assert fix("kutaAb", policy=CorrectionPolicy(enabled=False)) == "kutaAb"


def test_only_seen_words_scope():
    with pytest.raises(ValueError):
        CorrectionPolicy(scope="all-words")


def test_ties_go_to_smallest_form():
    lex = Lexicon({"ktb": Counter({"kutub": 1, "kataba": 1})})
    assert fix("kitibi", lex) == "kataba"


def test_case_slot_is_kept_and_ignored():
    lex = Lexicon({"ktAb": Counter({"kitaAbu": 3, "kutaAbi": 1})})
    word = decompose("kitaAba").with_ce_index(3)
    assert post_correct("ktAb", word, lex) == word
    wrong = decompose("katuAba").with_ce_index(3)
    assert post_correct("ktAb", wrong, lex).text == "kitaAba"


def test_counts_merge_across_case_endings():
    lex = Lexicon({"ktAb": Counter({"kitaAbu": 1, "kitaAbi": 1, "kutaAbu": 1})})
    counts = core_form_counts(lex, "ktAb", 3)
    assert counts[("i", "a", "", "")] == 2


def test_foreign_token_untouched():
    tok = foreign_word("2020")
    assert post_correct("2020", tok, Lexicon({"2020": Counter({"x": 1})})) == tok


def test_bare_must_match():
    with pytest.raises(ValueError):
        post_correct("ktb", decompose("kitaAb"), LEX)


LETTERS = "ktb"


@st.composite
def lexicon_and_prediction(draw):
    marks = st.tuples(*[st.sampled_from(COMBOS[:5])] * len(LETTERS))
    forms = draw(st.lists(marks, min_size=1, max_size=4))
    counts = draw(st.lists(st.integers(1, 5), min_size=len(forms), max_size=len(forms)))
    lex = Lexicon()
    for m, n in zip(forms, counts):
        lex.add(DiacritizedWord(LETTERS, m), n)
    slot = draw(st.sampled_from([None, len(LETTERS) - 1]))
    return lex, DiacritizedWord(LETTERS, draw(marks), slot)


@settings(max_examples=200)
@given(lexicon_and_prediction())
def test_output_core_in_lexicon_or_prediction(case):
    lex, pred = case
    out = post_correct(LETTERS, pred, lex)
    seen = set(core_form_counts(lex, LETTERS, pred.ce_index))
    assert out.core_marks() in seen | {pred.core_marks()}
    assert out.bare == pred.bare and out.ce_mark == pred.ce_mark
    assert post_correct(LETTERS, out, lex) == out
