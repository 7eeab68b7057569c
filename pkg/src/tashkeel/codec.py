"""Buckwalter transliteration and diacritized-word decomposition.

A diacritized Buckwalter word such as ``kut~aAb`` is split into its bare
letters (``ktAb``) and one mark combination per letter (``u``, ``~a``, ``""``,
``""``).  Mark combinations are plain strings in canonical order: an
optional shadda ``~`` followed by at most one vowel or tanween.  The empty
string means "no mark"; ``#`` is the virtual case ending, which is only
meaningful in a word's case-ending slot and is never written out.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

from .errors import DoubleVowel, MarkError, OrphanMark, UnknownCodepoint, UnknownSymbol

TABLE_VERSION = 1

# (symbol, codepoint, class).  Hamza seats, madda, wasla and dagger alef are
# letters: they never carry mark semantics of their own.
BUCKWALTER_TABLE: tuple[tuple[str, int, str], ...] = (
    ("'", 0x0621, "letter"),
    ("|", 0x0622, "letter"),
    (">", 0x0623, "letter"),
    ("&", 0x0624, "letter"),
    ("<", 0x0625, "letter"),
    ("}", 0x0626, "letter"),
    ("A", 0x0627, "letter"),
    ("b", 0x0628, "letter"),
    ("p", 0x0629, "letter"),
    ("t", 0x062A, "letter"),
    ("v", 0x062B, "letter"),
    ("j", 0x062C, "letter"),
    ("H", 0x062D, "letter"),
    ("x", 0x062E, "letter"),
    ("d", 0x062F, "letter"),
    ("*", 0x0630, "letter"),
    ("r", 0x0631, "letter"),
    ("z", 0x0632, "letter"),
    ("s", 0x0633, "letter"),
    ("$", 0x0634, "letter"),
    ("S", 0x0635, "letter"),
    ("D", 0x0636, "letter"),
    ("T", 0x0637, "letter"),
    ("Z", 0x0638, "letter"),
    ("E", 0x0639, "letter"),
    ("g", 0x063A, "letter"),
    ("f", 0x0641, "letter"),
    ("q", 0x0642, "letter"),
    ("k", 0x0643, "letter"),
    ("l", 0x0644, "letter"),
    ("m", 0x0645, "letter"),
    ("n", 0x0646, "letter"),
    ("h", 0x0647, "letter"),
    ("w", 0x0648, "letter"),
    ("Y", 0x0649, "letter"),
    ("y", 0x064A, "letter"),
    ("`", 0x0670, "letter"),
    ("{", 0x0671, "letter"),
    ("F", 0x064B, "mark"),
    ("N", 0x064C, "mark"),
    ("K", 0x064D, "mark"),
    ("a", 0x064E, "mark"),
    ("u", 0x064F, "mark"),
    ("i", 0x0650, "mark"),
    ("~", 0x0651, "mark"),
    ("o", 0x0652, "mark"),
)

BW2AR = {sym: chr(cp) for sym, cp, _ in BUCKWALTER_TABLE}
AR2BW = {chr(cp): sym for sym, cp, _ in BUCKWALTER_TABLE}
LETTERS = frozenset(sym for sym, _, cls in BUCKWALTER_TABLE if cls == "letter")
MARK_SYMBOLS = frozenset(sym for sym, _, cls in BUCKWALTER_TABLE if cls == "mark")
TATWEEL = "ـ"

SHADDA = "~"
SUKUN = "o"
VIRTUAL = "#"
NO_MARK = ""
VOWELS = ("a", "i", "u", "o", "F", "N", "K")
# Bit order of the PRIOR feature.
PRIMITIVE_MARKS = ("a", "i", "u", "o", "K", "N", "F", "~")

# Every combination a letter can carry in canonical order.  Shadda never
# pairs with sukun.
COMBOS: tuple[str, ...] = (
    NO_MARK, "a", "i", "u", "o", "F", "N", "K",
    "~", "~a", "~i", "~u", "~F", "~N", "~K",
)
CE_LABELS: tuple[str, ...] = COMBOS[1:] + (VIRTUAL,)


@dataclass(frozen=True)
class DiacritizedWord:
    """Bare letters plus one mark combination per letter.

    ``arabic`` is False for digits, Latin, punctuation and other tokens the
    codec cannot read; those keep their raw text in ``bare`` and carry no
    marks.
    """

    bare: str
    marks: tuple[str, ...]
    ce_index: int | None = None
    arabic: bool = True

    def __post_init__(self):
        if len(self.marks) != len(self.bare):
            raise ValueError(f"{len(self.marks)} marks for {len(self.bare)} letters")
        if self.ce_index is not None and not 0 <= self.ce_index < len(self.bare):
            raise ValueError(f"ce_index {self.ce_index} outside word of length {len(self.bare)}")

    @property
    def text(self) -> str:
        return recompose(self)

    @property
    def ce_mark(self) -> str | None:
        if self.ce_index is None:
            return None
        return self.marks[self.ce_index]

    def with_marks(self, marks) -> "DiacritizedWord":
        return replace(self, marks=tuple(marks))

    def with_ce_index(self, ce_index: int | None) -> "DiacritizedWord":
        return replace(self, ce_index=ce_index)

    def core_marks(self) -> tuple[str, ...]:
        """Marks with the case-ending slot blanked."""
        if self.ce_index is None:
            return self.marks
        marks = list(self.marks)
        marks[self.ce_index] = NO_MARK
        return tuple(marks)

    def __str__(self):
        return self.text


def split_combo(combo: str) -> tuple[bool, str]:
    """``"~a"`` -> ``(True, "a")``; ``""`` -> ``(False, "")``."""
    if combo.startswith(SHADDA):
        return True, combo[1:]
    return False, combo


def join_combo(shadda: bool, vowel: str) -> str:
    return (SHADDA if shadda else "") + vowel


def bw_to_arabic(s: str) -> str:
    out = []
    for i, ch in enumerate(s):
        try:
            out.append(BW2AR[ch])
        except KeyError:
            raise UnknownSymbol(i, ch) from None
    return "".join(out)


def arabic_to_bw(s: str) -> str:
    out = []
    for i, ch in enumerate(s):
        try:
            out.append(AR2BW[ch])
        except KeyError:
            raise UnknownCodepoint(i, ch) from None
    return "".join(out)


def is_arabic_script(s: str) -> bool:
    """True if any character of ``s`` is an Arabic letter or mark in the table."""
    return any(ch in AR2BW for ch in s)


def is_buckwalter_word(s: str) -> bool:
    """True if ``s`` reads as one Buckwalter word: table symbols only, at least one letter."""
    return bool(s) and all(ch in BW2AR for ch in s) and any(ch in LETTERS for ch in s)


def _combine(current: str, mark: str, pos: int) -> str:
    shadda, vowel = split_combo(current)
    if mark == SHADDA:
        if shadda:
            raise MarkError("repeated shadda", pos)
        if vowel == SUKUN:
            raise MarkError("shadda combined with sukun", pos)
        return join_combo(True, vowel)
    if vowel:
        raise DoubleVowel(pos)
    if mark == SUKUN and shadda:
        raise MarkError("shadda combined with sukun", pos)
    return join_combo(shadda, mark)


def decompose(word: str) -> DiacritizedWord:
    """Split a diacritized Buckwalter word into letters and per-letter marks.

    Marks are normalized to shadda-then-vowel, so ``ka~tab`` and ``kat~ab``
    decompose identically.  The case-ending slot is left unset.
    """
    bare: list[str] = []
    marks: list[str] = []
    for i, ch in enumerate(word):
        if ch in LETTERS:
            bare.append(ch)
            marks.append(NO_MARK)
        elif ch in MARK_SYMBOLS:
            if not bare:
                raise OrphanMark(i)
            marks[-1] = _combine(marks[-1], ch, i)
        else:
            raise UnknownSymbol(i, ch)
    return DiacritizedWord("".join(bare), tuple(marks))


def recompose(d: DiacritizedWord) -> str:
    if not d.arabic:
        return d.bare
    parts = []
    for letter, combo in zip(d.bare, d.marks):
        parts.append(letter)
        if combo != VIRTUAL:
            parts.append(combo)
    return "".join(parts)


def foreign_word(token: str) -> DiacritizedWord:
    """Wrap a token the codec does not transliterate (digits, Latin, punctuation)."""
    return DiacritizedWord(token, (NO_MARK,) * len(token), None, arabic=False)


def strip_diacritics(word: str) -> str:
    """Bare form of a diacritized Buckwalter word."""
    return "".join(ch for ch in word if ch not in MARK_SYMBOLS)


def read_token(token: str, script: str) -> DiacritizedWord:
    """Decode one whitespace token in ``script`` ("arabic" or "buckwalter").

    Tokens that are not entirely Arabic pass through as foreign words.
    Raises the codec's mark errors for ill-formed Arabic tokens.
    """
    if script == "arabic":
        token = token.replace(TATWEEL, "")
        if token and all(ch in AR2BW for ch in token):
            return decompose(arabic_to_bw(token))
        return foreign_word(token)
    if all(ch in BW2AR for ch in token) and token:
        return decompose(token)
    return foreign_word(token)


def write_token(word: DiacritizedWord, script: str) -> str:
    text = recompose(word)
    if script == "arabic" and word.arabic:
        return bw_to_arabic(text)
    return text


def iter_table() -> Iterator[tuple[str, str, str]]:
    """Rows of the mapping table as (symbol, "U+XXXX", class)."""
    for sym, cp, cls in BUCKWALTER_TABLE:
        yield sym, f"U+{cp:04X}", cls


def table_tsv() -> str:
    lines = [f"# buckwalter table v{TABLE_VERSION}", "symbol\tcodepoint\tclass"]
    lines += ["\t".join(row) for row in iter_table()]
    return "\n".join(lines) + "\n"
