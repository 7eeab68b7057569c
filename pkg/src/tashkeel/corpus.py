"""Corpus loading, validation split, lexicon and PRIOR tables."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from . import container
from .codec import (
    PRIMITIVE_MARKS,
    DiacritizedWord,
    is_arabic_script,
    read_token,
    recompose,
    split_combo,
)
from .errors import CorpusError, EmptyCorpus, EncodingError, MalformedToken, TashkeelError

ALL_BITS = 0xFF
_BIT = {mark: 1 << (7 - i) for i, mark in enumerate(PRIMITIVE_MARKS)}
TSV_COLUMNS = ("token", "diacritized", "segmentation", "pos", "gender_number")


@dataclass(frozen=True)
class SentenceRecord:
    tokens: tuple[DiacritizedWord, ...]
    raw: str
    source_id: str = ""
    script: str = "buckwalter"
    # per-token gold morphology from TSV corpora: dicts keyed by TSV_COLUMNS[2:]
    gold: tuple[dict | None, ...] | None = None

    @property
    def bare_words(self) -> list[str]:
        return [t.bare for t in self.tokens]

    def annotate(self, annotator):
        return annotator.annotate(self.bare_words, self.gold)


def _decode_lines(data: bytes):
    for lineno, raw in enumerate(data.split(b"\n"), start=1):
        try:
            yield lineno, raw.decode("utf-8").rstrip("\r")
        except UnicodeDecodeError:
            raise EncodingError(lineno) from None


def _read(token: str, script: str, lineno: int, col: int) -> DiacritizedWord:
    try:
        return read_token(token, script)
    except TashkeelError as exc:
        raise MalformedToken(lineno, col, str(exc)) from None


def parse_plain_line(line: str, script: str = "auto", lineno: int = 1, source: str = "") -> SentenceRecord | None:
    if not line.strip():
        return None
    if script == "auto":
        script = "arabic" if is_arabic_script(line) else "buckwalter"
    tokens = []
    col = 0
    for tok in line.split():
        col = line.index(tok, col)
        tokens.append(_read(tok, script, lineno, col + 1))
        col += len(tok)
    return SentenceRecord(tuple(tokens), line, f"{source}:{lineno}", script)


def load_corpus(path, format: str = "plain", script: str = "auto") -> list[SentenceRecord]:
    """Read a plain (one sentence per line) or TSV (token per row) corpus.

    ``script`` is "arabic", "buckwalter" or "auto" (decided per line for
    plain files, per sentence for TSV).
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    if format == "plain":
        out = []
        for lineno, line in _decode_lines(data):
            rec = parse_plain_line(line, script, lineno, path.name)
            if rec is not None:
                out.append(rec)
        return out
    if format == "tsv":
        return _load_tsv(data, script, path.name)
    raise ValueError(f"unknown corpus format {format!r}")


def _load_tsv(data: bytes, script: str, source: str) -> list[SentenceRecord]:
    out = []
    rows: list[tuple[int, list[str]]] = []

    def flush():
        if not rows:
            return
        text = " ".join(cols[1] if len(cols) > 1 and cols[1] else cols[0] for _, cols in rows)
        sc = script if script != "auto" else ("arabic" if is_arabic_script(text) else "buckwalter")
        tokens, gold = [], []
        for lineno, cols in rows:
            form = cols[1] if len(cols) > 1 and cols[1] else cols[0]
            word = _read(form, sc, lineno, 1)
            bare_in = _read(cols[0], sc, lineno, 1).bare
            if bare_in != word.bare:
                raise MalformedToken(lineno, 1, f"token {cols[0]!r} does not match diacritized form {form!r}")
            tokens.append(word)
            extra = {name: (cols[i] if len(cols) > i and cols[i] else None)
                     for i, name in enumerate(TSV_COLUMNS) if i >= 2}
            gold.append(extra if any(extra.values()) else None)
        has_gold = any(g is not None for g in gold)
        out.append(SentenceRecord(tuple(tokens), text, f"{source}:{rows[0][0]}", sc,
                                  tuple(gold) if has_gold else None))
        rows.clear()

    for lineno, line in _decode_lines(data):
        if line.startswith("#"):
            continue
        if not line.strip():
            flush()
            continue
        rows.append((lineno, line.split("\t")))
    flush()
    return out


def split_validation(corpus: list, fraction: float = 0.05, seed: int = 0):
    """Random sentence-level split; corpus order is kept inside both parts."""
    if not corpus:
        raise EmptyCorpus("cannot split an empty corpus")
    if not 0 < fraction < 1:
        raise ValueError("fraction must be in (0, 1)")
    n_val = round(fraction * len(corpus))
    chosen = set(random.Random(seed).sample(range(len(corpus)), n_val))
    train = [s for i, s in enumerate(corpus) if i not in chosen]
    val = [s for i, s in enumerate(corpus) if i in chosen]
    return train, val


class Lexicon:
    """Bare word -> counts of its diacritized forms (a unigram model)."""

    def __init__(self, entries: dict[str, Counter] | None = None):
        self.entries: dict[str, Counter] = entries or {}

    @property
    def total_tokens(self) -> int:
        return sum(sum(c.values()) for c in self.entries.values())

    def __contains__(self, bare: str) -> bool:
        return bare in self.entries

    def __len__(self):
        return len(self.entries)

    def forms(self, bare: str) -> Counter:
        return self.entries.get(bare, Counter())

    def most_frequent(self, bare: str) -> str | None:
        counts = self.entries.get(bare)
        if not counts:
            return None
        return min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]

    def add(self, word: DiacritizedWord, count: int = 1):
        self.entries.setdefault(word.bare, Counter())[recompose(word)] += count

    def to_tsv(self) -> str:
        lines = ["bare\tform\tcount"]
        for bare in sorted(self.entries):
            for form, n in sorted(self.entries[bare].items()):
                lines.append(f"{bare}\t{form}\t{n}")
        return "\n".join(lines) + "\n"

    def save(self, path):
        entries = {b: dict(sorted(c.items())) for b, c in sorted(self.entries.items())}
        container.save(path, "lexicon", {"entries": entries, "total_tokens": self.total_tokens})

    @classmethod
    def load(cls, path) -> "Lexicon":
        meta, _ = container.load(path, "lexicon")
        return cls({b: Counter(forms) for b, forms in meta["entries"].items()})


def build_lexicon(train) -> Lexicon:
    lex = Lexicon()
    for rec in train:
        for tok in rec.tokens:
            if tok.arabic:
                lex.add(tok)
    return lex


def mark_bits(combo: str) -> int:
    """PRIOR bits set by one mark combination (shadda combos set two bits)."""
    shadda, vowel = split_combo(combo)
    bits = _BIT["~"] if shadda else 0
    if vowel and vowel in _BIT:
        bits |= _BIT[vowel]
    return bits


def bits_str(bits: int) -> str:
    return f"{bits:08b}"


class PriorTable:
    """Bare segment -> per-letter bitmask of marks seen on that letter in training."""

    def __init__(self, entries: dict[str, tuple[int, ...]] | None = None):
        self.entries: dict[str, tuple[int, ...]] = entries or {}

    def __contains__(self, segment: str) -> bool:
        return segment in self.entries

    def __len__(self):
        return len(self.entries)

    def lookup(self, segment: str) -> tuple[int, ...]:
        return self.entries.get(segment, (ALL_BITS,) * len(segment))

    def lookup_str(self, segment: str) -> list[str]:
        return [bits_str(b) for b in self.lookup(segment)]

    def word_bits(self, seg) -> list[int]:
        """Per-letter bits for a whole word given its Segmentation."""
        out: list[int] = []
        for piece in seg.segments:
            out.extend(self.lookup(piece))
        return out

    def observe(self, segment: str, marks):
        cur = list(self.entries.get(segment, (0,) * len(segment)))
        for i, combo in enumerate(marks):
            cur[i] |= mark_bits(combo)
        self.entries[segment] = tuple(cur)

    def to_tsv(self) -> str:
        lines = ["segment\tbits"]
        for seg in sorted(self.entries):
            lines.append(f"{seg}\t{' '.join(bits_str(b) for b in self.entries[seg])}")
        return "\n".join(lines) + "\n"

    def save(self, path):
        entries = {s: list(v) for s, v in sorted(self.entries.items())}
        container.save(path, "priors", {"entries": entries})

    @classmethod
    def load(cls, path) -> "PriorTable":
        meta, _ = container.load(path, "priors")
        return cls({s: tuple(v) for s, v in meta["entries"].items()})


def build_prior_table(train, annotator) -> PriorTable:
    table = PriorTable()
    for rec in train:
        for tok, ann in zip(rec.tokens, rec.annotate(annotator)):
            if not tok.arabic:
                continue
            start = 0
            for piece in ann.segmentation.segments:
                table.observe(piece, tok.marks[start: start + len(piece)])
                start += len(piece)
    return table
