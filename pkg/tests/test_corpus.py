import random
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tashkeel import container
from tashkeel.codec import decompose, read_token
from tashkeel.corpus import (
    ALL_BITS, Lexicon, PriorTable, SentenceRecord, bits_str, build_lexicon, build_prior_table, load_corpus,
    mark_bits, split_validation,
)
from tashkeel.errors import ContainerError, EmptyCorpus, EncodingError, MalformedToken, ModelVersionMismatch
from tashkeel.morpho import make_annotator


def records(*lines):
    return [SentenceRecord(tuple(read_token(t, "buckwalter") for t in line.split()), line) for line in lines]


def test_load_plain_arabic(tmp_path):
    p = tmp_path / "a.txt"
    p.write_text("كَتَبَ\n", encoding="utf-8")
    corpus = load_corpus(p)
    assert len(corpus) == 1
    assert corpus[0].tokens[0].marks == ("a", "a", "a")
    assert corpus[0].script == "arabic"


def test_load_empty_file(tmp_path):
    p = tmp_path / "empty.txt"
    p.write_bytes(b"")
    assert load_corpus(p) == []


def test_orphan_mark_reports_line(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("كتب\nً\n", encoding="utf-8")
    with pytest.raises(MalformedToken) as exc:
        load_corpus(p)
    assert exc.value.line == 2


def test_bad_utf8_reports_line(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_bytes(b"ktb\n\xff\xfe\n")
    with pytest.raises(EncodingError) as exc:
        load_corpus(p)
    assert exc.value.line == 2


def test_load_tsv_with_gold(tmp_path):
    p = tmp_path / "g.tsv"
    p.write_text("# comment\nwbmktbtnA\twabimakotabatinA\tw+b+mktb+t+nA\tCONJ+PREP+NOUN+NSUFF+PRON\tfs\n"
                 ".\t.\n\nktb\tkataba\n", encoding="utf-8")
    corpus = load_corpus(p, "tsv")
    assert [len(r.tokens) for r in corpus] == [2, 1]
    assert corpus[0].gold[0]["pos"] == "CONJ+PREP+NOUN+NSUFF+PRON"
    assert corpus[0].gold[1] is None
    assert corpus[1].gold is None


def test_tsv_token_form_mismatch(tmp_path):
    p = tmp_path / "g.tsv"
    p.write_text("ktb\tkatabu\nktA\tkitaAb\n", encoding="utf-8")
    with pytest.raises(MalformedToken) as exc:
        load_corpus(p, "tsv")
    assert exc.value.line == 2


@pytest.mark.parametrize("n, fraction, n_val", [(100, 0.05, 5), (2, 0.5, 1)])
def test_split_sizes(n, fraction, n_val):
    corpus = list(range(n))
    train, val = split_validation(corpus, fraction, seed=3)
    assert len(val) == n_val and len(train) == n - n_val
    assert sorted(train + val) == corpus


def test_split_errors():
    with pytest.raises(EmptyCorpus):
        split_validation([], 0.05)
    with pytest.raises(ValueError):
        split_validation([1, 2], 1.0)


@given(st.integers(1, 200), st.floats(0.01, 0.99), st.integers(0, 2**32))
def test_split_deterministic_and_disjoint(n, fraction, seed):
    corpus = list(range(n))
    a = split_validation(corpus, fraction, seed)
    assert a == split_validation(corpus, fraction, seed)
    assert set(a[0]).isdisjoint(a[1]) and len(a[0]) + len(a[1]) == n
    assert len(a[1]) == round(fraction * n)


def test_lexicon_counts():
    lex = build_lexicon(records("kitaAb kitaAb", "kut~aAb ."))
    assert dict(lex.forms("ktAb")) == {"kitaAb": 2, "kut~aAb": 1}
    assert lex.most_frequent("ktAb") == "kitaAb"
    assert "." not in lex
    assert lex.total_tokens == 3
    assert len(build_lexicon([])) == 0


def test_lexicon_tie_is_lexicographic():
    lex = build_lexicon(records("kutub katab kutub katab"))
    assert lex.most_frequent("ktb") == "katab"


def test_lexicon_persistence(tmp_path):
    lex = build_lexicon(records("kitaAb kitaAb kut~aAb"))
    lex.save(tmp_path / "lex.bin")
    again = Lexicon.load(tmp_path / "lex.bin")
    assert again.entries == lex.entries
    assert again.to_tsv() == lex.to_tsv()


def test_prior_examples():
    naive = make_annotator("naive")
    table = build_prior_table(records("kitaAb kut~aAb"), naive)
    assert table.lookup_str("ktAb")[0] == "01100000"
    assert table.lookup_str("qlm") == ["11111111"] * 3
    single = build_prior_table(records("katab"), naive)
    assert single.lookup_str("ktb")[0] == "10000000"


def test_mark_bits_order():
    assert [bits_str(mark_bits(m)) for m in ("a", "i", "u", "o", "K", "N", "F", "~")] == [
        "10000000", "01000000", "00100000", "00010000", "00001000", "00000100", "00000010", "00000001"]
    assert bits_str(mark_bits("~a")) == "10000001"
    assert mark_bits("") == 0 and mark_bits("#") == 0


def test_prior_persistence(tmp_path):
    table = build_prior_table(records("wAlkitaAbu kut~aAb"), make_annotator("naive"))
    table.save(tmp_path / "p.bin")
    assert PriorTable.load(tmp_path / "p.bin").entries == table.entries
    assert "ktAb" in table.to_tsv()


def test_prior_unseen_is_all_ones():
    assert PriorTable().lookup("abc") == (ALL_BITS,) * 3


def test_container_rejects_bad_files(tmp_path):
    data = container.dumps("lexicon", {"entries": {}})
    with pytest.raises(ContainerError):
        container.loads(b"NOTMAGIC" + data[8:])
    with pytest.raises(ContainerError):
        container.loads(data, "priors")
    bumped = data[:8] + struct.pack("<H", 99) + data[10:]
    with pytest.raises(ModelVersionMismatch):
        container.loads(bumped)


def test_prior_replay_small():
    rng = random.Random(0)
    from conftest import random_word
    recs = records(*[" ".join(random_word(rng) for _ in range(5)) for _ in range(20)])
    naive = make_annotator("naive")
    table = build_prior_table(recs, naive)
    for rec in recs:
        for tok, ann in zip(rec.tokens, rec.annotate(naive)):
            bits = table.word_bits(ann.segmentation)
            assert all(bits[i] & mark_bits(m) == mark_bits(m) for i, m in enumerate(tok.marks))


@settings(max_examples=20)
@given(st.lists(st.sampled_from(["kitaAb", "kut~aAb", "katab", "kutub", "wAlkitaAbu"]), min_size=1))
def test_lexicon_keys_match_forms(tokens):
    lex = build_lexicon(records(" ".join(tokens)))
    for bare, forms in lex.entries.items():
        assert all(decompose(f).bare == bare and n >= 1 for f, n in forms.items())
