import random

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from tashkeel.codec import read_token
from tashkeel.corpus import ALL_BITS, PriorTable, SentenceRecord, build_prior_table, mark_bits
from tashkeel.cw_features import (
    CW_FEATURE_SETS, IGNORE, WB, CwEncoder, case_flags, ce_slot, chunk_tokens, cw_label, dump_rows, encode_cw,
    render_seg_labels, seg_labels,
)
from tashkeel.morpho import NaiveAnnotator, Segmentation, segment

NAIVE = NaiveAnnotator()


def sentence(text):
    return SentenceRecord(tuple(read_token(t, "buckwalter") for t in text.split()), text)


def test_seg_labels_examples():
    assert render_seg_labels(segment("wAlktAb")) == "S+BE+BMME"
    assert seg_labels(Segmentation((), "w")) == ["S"]
    assert seg_labels(Segmentation((), "lA")) == ["B", "E"]


def test_case_flag_examples():
    for word, slot in (("ktAb", 3), ("mktbp", 4), ("wbmktbtnA", 6)):
        tok = read_token(word, "buckwalter")
        flags = case_flags(tok, segment(word))
        assert flags.index(True) == slot and sum(flags) == 1
        assert ce_slot(segment(word)) == slot
    assert case_flags(read_token("2020", "buckwalter"), Segmentation((), "2020")) == [False] * 4


def test_cw_label_keeps_only_shadda_on_slot():
    assert cw_label("~u", True) == "~"
    assert cw_label("u", True) == ""
    assert cw_label("~u", False) == "~u"


def test_two_word_structure():
    (ex,) = encode_cw(sentence("ktb ktAb"), PriorTable(), NAIVE)
    assert len(ex) == 8
    assert [r.char for r in ex.rows] == list("ktb") + [WB] + list("ktAb")
    wb = ex.rows[3]
    assert wb.seg == "WB" and wb.prior == ALL_BITS and wb.case is False
    assert ex.labels[3] is None and ex.positions[3] is None


def test_unseen_word_prior_is_all_ones():
    priors = build_prior_table([sentence("kitaAb")], NAIVE)
    (ex,) = encode_cw(sentence("qalam"), priors, NAIVE)
    assert all(r.prior == ALL_BITS for r in ex.rows)


def test_labels_from_reference():
    (ex,) = encode_cw(sentence("kataba kut~aAbu"), PriorTable(), NAIVE)
    assert ex.labels == ["a", "a", "", None, "u", "~a", "", ""]


def test_long_sentence_is_split():
    rng = random.Random(1)
    words = ["".join(rng.choice("ktbdrsmqn") for _ in range(rng.randint(3, 9))) for _ in range(500)]
    text = " ".join(words)
    assert len(text) >= 3000
    chunks = encode_cw(sentence(text), PriorTable(), NAIVE)
    assert len(chunks) >= 3 and all(len(c) <= 1250 for c in chunks)
    seen = [p[0] for c in chunks for p in c.positions if p is not None]
    assert sorted(set(seen)) == list(range(len(words)))


@given(st.lists(st.integers(1, 40), max_size=60), st.integers(40, 120))
def test_chunking_preserves_order(lengths, cap):
    groups = chunk_tokens(lengths, cap)
    assert [i for g in groups for i in g] == list(range(len(lengths)))
    for g in groups:
        assert sum(lengths[i] for i in g) + len(g) - 1 <= cap


def test_encoder_columns_and_ids():
    exs = encode_cw(sentence("wAlkitaAbu kataba"), PriorTable(), NAIVE)
    for name, feats in CW_FEATURE_SETS.items():
        enc = CwEncoder.fit(exs, name)
        ids, labels = enc.encode(exs[0])
        assert ids.shape == (len(exs[0]), len(feats))
        assert "case" in feats
        assert (ids > 0).all()
        assert labels[len("wAlktAb")] == IGNORE
        assert len(enc.vocab_sizes()) == len(feats)


def test_encoder_round_trip_and_unk():
    exs = encode_cw(sentence("kataba"), PriorTable(), NAIVE)
    enc = CwEncoder.fit(exs, "all")
    again = CwEncoder.from_json(enc.to_json())
    (other,) = encode_cw(sentence("qalam"), PriorTable(), NAIVE)
    assert np.array_equal(enc.encode(other)[0], again.encode(other)[0])
    assert enc.encode(other)[0][0, 0] == enc.chars.id("<unk>")


@settings(max_examples=30)
@given(st.lists(st.sampled_from(["wAlkitaAbu", "kataba", "kut~aAbN", "bimakotabatihA", "Alwaladu", "2020"]),
                min_size=1, max_size=8))
def test_flags_and_prior_replay(tokens):
    rec = sentence(" ".join(tokens))
    priors = build_prior_table([rec], NAIVE)
    (ex,) = encode_cw(rec, priors, NAIVE)
    arabic = sum(t.arabic for t in rec.tokens)
    assert sum(r.case for r in ex.rows) == arabic
    for row, pos in zip(ex.rows, ex.positions):
        if pos is None:
            continue
        tok = rec.tokens[pos[0]]
        if tok.arabic:
            m = mark_bits(tok.marks[pos[1]])
            assert row.prior & m == m


def test_dump_rows():
    (ex,) = encode_cw(sentence("kataba ktb"), PriorTable(), NAIVE)
    lines = dump_rows(ex).splitlines()
    assert lines[0] == "char\tseg\tprior\tcase\tlabel"
    assert lines[1] == "k\tB\t11111111\t0\ta"
    assert lines[4] == f"{WB}\tWB\t11111111\t0\t-"
