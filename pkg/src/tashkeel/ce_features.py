"""Word-level features for the case-ending model and their ablation groupings."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .codec import CE_LABELS, SUKUN, VIRTUAL
from .cw_features import IGNORE, with_ce_slots
from .morpho import MorphoAnnotation
from .vocab import MASK, PAD, UNK, Vocab

BOUNDARY = "_"
SUKUN_THRESHOLD = 3


class CeFeatureRow(NamedTuple):
    word: str
    word_pos: str
    gender_number: str
    stem: str
    stem_pos: str
    prefixes: str
    prefix_pos: str
    suffixes: str
    suffix_pos: str
    stem_template: str
    word_head_uni: str
    word_head_bi: str
    word_tail_uni: str
    word_tail_bi: str
    stem_head_uni: str
    stem_head_bi: str
    stem_tail_uni: str
    stem_tail_bi: str
    is_sukun_word: bool
    is_named_entity: bool


CE_FIELDS = CeFeatureRow._fields
_SURFACE = ("word", "stem", "prefixes", "suffixes")
_POS = ("word", "word_pos", "gender_number", "stem_pos", "prefix_pos", "suffix_pos")
_MORPH = ("word", "stem_template")
FEATURE_SETS: dict[str, frozenset[str]] = {
    "word": frozenset({"word"}),
    "word-surface": frozenset(_SURFACE),
    "word-POS": frozenset(_POS),
    "word-morph": frozenset(_MORPH),
    "word-surface-POS-morph": frozenset(_SURFACE + _POS + _MORPH),
    "all-misc": frozenset(CE_FIELDS),
}


def _heads(s: str) -> tuple[str, str]:
    return s[:1], s[:2] if len(s) >= 2 else s + BOUNDARY


def _tails(s: str) -> tuple[str, str]:
    return s[-1:], s[-2:] if len(s) >= 2 else BOUNDARY + s


def extract_ce_row(word: str, annot: MorphoAnnotation, sukun_words=frozenset(),
                   named_entities=frozenset()) -> CeFeatureRow:
    seg = annot.segmentation
    stem = seg.ce_stem
    stem_key = "+".join((seg.stem,) + tuple("p" if s == "t" and seg.suffixes else s for s in seg.noun_suffixes))
    wh = _heads(word)
    wt = _tails(word)
    sh = _heads(stem)
    st = _tails(stem)
    return CeFeatureRow(
        word=word,
        word_pos=annot.word_pos,
        gender_number=f"{annot.gender}/{annot.number}",
        stem=stem_key,
        stem_pos=annot.stem_pos,
        prefixes="+".join(seg.prefixes) if seg.prefixes else "",
        prefix_pos="+".join(annot.prefix_pos) if annot.prefix_pos else "",
        suffixes="".join("+" + s for s in seg.suffixes),
        suffix_pos="+".join(annot.suffix_pos) if annot.suffix_pos else "",
        stem_template=annot.stem_template,
        word_head_uni=wh[0], word_head_bi=wh[1],
        word_tail_uni=wt[0], word_tail_bi=wt[1],
        stem_head_uni=sh[0], stem_head_bi=sh[1],
        stem_tail_uni=st[0], stem_tail_bi=st[1],
        is_sukun_word=word in sukun_words,
        is_named_entity=word in named_entities,
    )


def ce_label(tok) -> str:
    """Reference CE label of a token whose ce_index is set."""
    if not tok.arabic or tok.ce_index is None:
        return VIRTUAL
    return tok.marks[tok.ce_index] or VIRTUAL


def build_sukun_list(train, annotator, threshold: int = SUKUN_THRESHOLD) -> frozenset[str]:
    """Bare words seen at least ``threshold`` times whose CE is always sukun."""
    seen = defaultdict(set)
    counts = defaultdict(int)
    for rec in train:
        for tok in with_ce_slots(rec.tokens, rec.annotate(annotator)):
            if not tok.arabic:
                continue
            seen[tok.bare].add(ce_label(tok))
            counts[tok.bare] += 1
    return frozenset(w for w, labels in seen.items() if labels == {SUKUN} and counts[w] >= threshold)


def load_ne_gazetteer(path) -> frozenset[str]:
    text = Path(path).read_text(encoding="utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def apply_selector(row: CeFeatureRow, sel: str):
    """Row with every field outside the selector replaced by the MASK value."""
    live = FEATURE_SETS[sel]
    return row._replace(**{f: MASK for f in CE_FIELDS if f not in live})


class CeEncoder:
    """Per-field vocabularies (PAD=0, UNK=1, MASK=2) and the 15-way label set."""

    SPECIALS = (PAD, UNK, MASK)

    def __init__(self, vocabs: dict[str, Vocab], feature_set: str = "all-misc"):
        if feature_set not in FEATURE_SETS:
            raise ValueError(f"unknown CE feature set {feature_set!r}")
        self.vocabs = vocabs
        self.feature_set = feature_set
        self.labels = Vocab(CE_LABELS, specials=())

    @staticmethod
    def _value(v) -> str:
        if isinstance(v, bool):
            return "1" if v else "0"
        return v

    @classmethod
    def fit(cls, rows, feature_set: str = "all-misc") -> "CeEncoder":
        rows = list(rows)
        vocabs = {}
        for i, f in enumerate(CE_FIELDS):
            values = ["0", "1"] if f.startswith("is_") else [r[i] for r in rows]
            vocabs[f] = Vocab.build(values, specials=cls.SPECIALS)
        return cls(vocabs, feature_set)

    def vocab_sizes(self) -> list[int]:
        return [len(self.vocabs[f]) for f in CE_FIELDS]

    def row_ids(self, row: CeFeatureRow) -> list[int]:
        masked = apply_selector(row, self.feature_set)
        return [self.vocabs[f].id(self._value(v)) for f, v in zip(CE_FIELDS, masked)]

    def encode(self, rows, labels=None) -> tuple[np.ndarray, np.ndarray]:
        ids = np.array([self.row_ids(r) for r in rows], dtype=np.int32).reshape(len(rows), len(CE_FIELDS))
        if labels is None:
            lab = np.full(len(rows), IGNORE, dtype=np.int32)
        else:
            lab = np.array([self.labels.id(x) for x in labels], dtype=np.int32)
        return ids, lab

    def to_json(self) -> dict:
        return {"vocabs": {f: v.to_json() for f, v in self.vocabs.items()}, "feature_set": self.feature_set}

    @classmethod
    def from_json(cls, data: dict) -> "CeEncoder":
        return cls({f: Vocab.from_json(v) for f, v in data["vocabs"].items()}, data["feature_set"])


def sentence_rows(record, annotations, sukun_words=frozenset(), named_entities=frozenset()):
    """Feature rows and reference CE labels for one sentence."""
    tokens = with_ce_slots(record.tokens, annotations)
    rows = [extract_ce_row(t.bare, a, sukun_words, named_entities) for t, a in zip(tokens, annotations)]
    return rows, [ce_label(t) for t in tokens]

