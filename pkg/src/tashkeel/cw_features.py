"""Character-level features and labels for the core-word model.

Each character row carries four features: the character itself, its
position inside its segment (B/M/E/S), the PRIOR bitmask of marks seen on
it in training, and whether it is the word's case-ending slot.  Words are
separated by a single word-boundary (WB) row.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .codec import COMBOS, NO_MARK, DiacritizedWord, split_combo
from .corpus import ALL_BITS, PriorTable, SentenceRecord, bits_str
from .morpho import Segmentation
from .vocab import PAD, UNK, Vocab

MAX_CHARS = 1250
WB = "<wb>"
SEG_LABELS = ("B", "M", "E", "S", "WB")
CW_FEATURES = ("char", "seg", "prior", "case")
# CASE is part of every setup
CW_FEATURE_SETS = {
    "char": ("char", "case"),
    "char+seg": ("char", "seg", "case"),
    "char+prior": ("char", "prior", "case"),
    "all": CW_FEATURES,
}
CW_LABELS = COMBOS
IGNORE = -1


class CwCharRow(NamedTuple):
    char: str
    seg: str
    prior: int
    case: bool


@dataclass
class CwExample:
    rows: list[CwCharRow]
    labels: list[str | None]
    # (token index, letter index) per row; None on WB rows
    positions: list[tuple[int, int] | None]

    def __len__(self):
        return len(self.rows)


def seg_labels(seg: Segmentation) -> list[str]:
    out = []
    for piece in seg.segments:
        if len(piece) == 1:
            out.append("S")
        else:
            out.extend(["B"] + ["M"] * (len(piece) - 2) + ["E"])
    return out


def render_seg_labels(seg: Segmentation) -> str:
    """``w+Al+ktAb`` -> ``S+BE+BMME``."""
    labels = seg_labels(seg)
    parts, i = [], 0
    for piece in seg.segments:
        parts.append("".join(labels[i: i + len(piece)]))
        i += len(piece)
    return "+".join(parts)


def ce_slot(seg: Segmentation) -> int:
    """Index of the case-ending letter: last letter of stem plus noun suffixes."""
    return seg.prefix_length + len(seg.stem) + sum(map(len, seg.noun_suffixes)) - 1


def case_flags(word: DiacritizedWord, seg: Segmentation) -> list[bool]:
    flags = [False] * len(word.bare)
    if word.arabic and word.bare:
        flags[ce_slot(seg)] = True
    return flags


def with_ce_slots(tokens, annotations) -> list[DiacritizedWord]:
    """Tokens with ``ce_index`` set from their segmentation (None for foreign tokens)."""
    out = []
    for tok, ann in zip(tokens, annotations):
        out.append(tok.with_ce_index(ce_slot(ann.segmentation) if tok.arabic and tok.bare else None))
    return out


def cw_label(combo: str, is_ce: bool) -> str:
    """Training label for one letter; the case-ending slot keeps only its shadda."""
    if not is_ce:
        return combo
    shadda, _ = split_combo(combo)
    return "~" if shadda else NO_MARK


def _word_rows(tok: DiacritizedWord, seg: Segmentation, priors: PriorTable):
    flags = case_flags(tok, seg)
    if tok.arabic:
        segs = seg_labels(seg)
        bits = priors.word_bits(seg)
    else:
        segs = seg_labels(Segmentation((), tok.bare)) if tok.bare else []
        bits = [ALL_BITS] * len(tok.bare)
    return [CwCharRow(ch, s, b, f) for ch, s, b, f in zip(tok.bare, segs, bits, flags)]


def chunk_tokens(lengths, max_len: int = MAX_CHARS) -> list[list[int]]:
    """Group consecutive token indices so each group's rows (letters + WBs) fit ``max_len``.

    A token longer than ``max_len`` gets a group of its own.
    """
    groups: list[list[int]] = []
    cur: list[int] = []
    size = 0
    for i, n in enumerate(lengths):
        need = n if not cur else size + 1 + n
        if cur and need > max_len:
            groups.append(cur)
            cur, size = [i], n
        else:
            cur.append(i)
            size = need
    if cur:
        groups.append(cur)
    return groups


def encode_cw(sentence: SentenceRecord, priors: PriorTable, annot, max_len: int = MAX_CHARS,
              annotations=None) -> list[CwExample]:
    """Rows and labels for one sentence, split at word boundaries into chunks of at most ``max_len`` rows.

    ``annotations`` may be passed to reuse an existing analysis of the sentence.
    """
    anns = annotations if annotations is not None else sentence.annotate(annot)
    per_token = []
    for ti, (tok, ann) in enumerate(zip(sentence.tokens, anns)):
        rows = _word_rows(tok, ann.segmentation, priors)
        labels = []
        for li, row in enumerate(rows):
            labels.append(cw_label(tok.marks[li], row.case) if tok.arabic else NO_MARK)
        per_token.append((rows, labels, [(ti, li) for li in range(len(rows))]))

    out = []
    for group in chunk_tokens([len(p[0]) for p in per_token], max_len):
        rows, labels, positions = [], [], []
        for k, ti in enumerate(group):
            if k:
                rows.append(CwCharRow(WB, "WB", ALL_BITS, False))
                labels.append(None)
                positions.append(None)
            r, lab, pos = per_token[ti]
            rows += r
            labels += lab
            positions += pos
        # a single token longer than max_len is cut into consecutive pieces
        for start in range(0, max(len(rows), 1), max_len):
            out.append(CwExample(rows[start: start + max_len], labels[start: start + max_len],
                                 positions[start: start + max_len]))
    return out


class CwEncoder:
    """Turns CwExamples into integer arrays for a given feature set."""

    def __init__(self, chars: Vocab, feature_set: str = "all"):
        if feature_set not in CW_FEATURE_SETS:
            raise ValueError(f"unknown CW feature set {feature_set!r}")
        self.chars = chars
        self.feature_set = feature_set
        self.features = CW_FEATURE_SETS[feature_set]
        self.seg_vocab = Vocab(SEG_LABELS)
        self.labels = Vocab(CW_LABELS, specials=())

    @classmethod
    def fit(cls, examples, feature_set: str = "all") -> "CwEncoder":
        chars = Vocab.build((row.char for ex in examples for row in ex.rows if row.char != WB),
                            specials=(PAD, UNK, WB))
        return cls(chars, feature_set)

    def vocab_sizes(self) -> list[int]:
        sizes = {"char": len(self.chars), "seg": len(self.seg_vocab), "prior": ALL_BITS + 2, "case": 3}
        return [sizes[f] for f in self.features]

    def row_ids(self, row: CwCharRow) -> list[int]:
        # id 0 is PAD in every column
        values = {
            "char": self.chars.id(row.char),
            "seg": self.seg_vocab.id(row.seg),
            "prior": row.prior + 1,
            "case": 2 if row.case else 1,
        }
        return [values[f] for f in self.features]

    def encode(self, ex: CwExample) -> tuple[np.ndarray, np.ndarray]:
        ids = np.array([self.row_ids(r) for r in ex.rows], dtype=np.int32).reshape(len(ex.rows), len(self.features))
        labels = np.array([IGNORE if lab is None else self.labels.id(lab) for lab in ex.labels], dtype=np.int32)
        return ids, labels

    def to_json(self) -> dict:
        return {"chars": self.chars.to_json(), "feature_set": self.feature_set}

    @classmethod
    def from_json(cls, data: dict) -> "CwEncoder":
        return cls(Vocab.from_json(data["chars"]), data["feature_set"])


def dump_rows(ex: CwExample) -> str:
    lines = ["char\tseg\tprior\tcase\tlabel"]
    for row, lab in zip(ex.rows, ex.labels):
        label = "-" if lab is None else (lab or "_")
        lines.append(f"{row.char}\t{row.seg}\t{bits_str(row.prior)}\t{int(row.case)}\t{label}")
    return "\n".join(lines) + "\n"
