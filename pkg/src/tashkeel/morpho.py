"""Morphological annotation: segmentation, POS, gender/number, stem templates.

Two annotators are provided.  ``NaiveAnnotator`` strips affixes against
fixed inventories and knows nothing about stem POS.  ``GoldAnnotator`` takes
per-token columns from a TSV corpus (segmentation, POS, gender/number) and
falls back to the naive analysis for tokens without them.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from functools import lru_cache

from .codec import LETTERS
from .errors import AnnotationMismatch
from .datafiles import read_resource

UNKNOWN = "unknown"
UNK_TEMPLATE = "UNK"

CONJUNCTIONS = ("w", "f")
PREPOSITIONS = ("b", "k", "l")
FUTURE = "s"
DETERMINER = "Al"

PRONOUNS = ("hmA", "kmA", "hm", "hn", "hA", "km", "kn", "nA", "ny", "h", "k", "y")
NOUN_SUFFIXES = ("At", "An", "wn", "yn", "p")
# feminine marker written as t before an attached pronoun
BOUND_FEMININE = "t"

AFFIX_POS = {
    "w": "CONJ", "f": "CONJ",
    "b": "PREP", "k": "PREP", "l": "PREP",
    "s": "FUT_PART", "Al": "DET",
}
PREFIX_TAGS = frozenset({"CONJ", "PREP", "DET", "FUT_PART", "PART", "NEG_PART", "INTERROG_PART"})
NSUFF_TAG = "NSUFF"

GENDER_NUMBER = {
    "p": ("f", "sg"), "t": ("f", "sg"), "At": ("f", "pl"),
    "wn": ("m", "pl"), "yn": ("m", "pl"), "An": (UNKNOWN, "du"),
}


@dataclass(frozen=True)
class Segmentation:
    prefixes: tuple[str, ...]
    stem: str
    noun_suffixes: tuple[str, ...] = ()
    suffixes: tuple[str, ...] = ()

    @property
    def segments(self) -> tuple[str, ...]:
        return self.prefixes + (self.stem,) + self.noun_suffixes + self.suffixes

    @property
    def word(self) -> str:
        return "".join(self.segments)

    @property
    def prefix_length(self) -> int:
        return sum(map(len, self.prefixes))

    @property
    def ce_stem(self) -> str:
        """Stem with its noun suffixes; a bound feminine ``t`` is restored to ``p``."""
        nsuff = tuple("p" if (s == BOUND_FEMININE and self.suffixes) else s for s in self.noun_suffixes)
        return self.stem + "".join(nsuff)

    def __str__(self):
        return "+".join(self.segments)


@dataclass(frozen=True)
class MorphoAnnotation:
    segmentation: Segmentation
    word_pos: str = UNKNOWN
    stem_pos: str = UNKNOWN
    prefix_pos: tuple[str, ...] = ()
    suffix_pos: tuple[str, ...] = ()
    gender: str = UNKNOWN
    number: str = UNKNOWN
    stem_template: str = UNK_TEMPLATE

    def __post_init__(self):
        seg = self.segmentation
        if len(self.prefix_pos) != len(seg.prefixes) or len(self.suffix_pos) != len(seg.suffixes):
            raise ValueError("POS lists must match segment counts")


def is_arabic_word(word: str) -> bool:
    return bool(word) and all(ch in LETTERS for ch in word)


def token_class(token: str) -> str:
    """POS given to tokens that are not Arabic words: PUNC, NUM or FOREIGN."""
    if all(unicodedata.category(ch).startswith(("P", "S")) for ch in token):
        return "PUNC"
    if all(unicodedata.category(ch) == "Nd" or ch in ".,٫٬" for ch in token):
        return "NUM"
    return "FOREIGN"


# --- segmentation --------------------------------------------------------

def _prefix_candidates():
    out = []
    for conj in ("",) + CONJUNCTIONS:
        for prep in ("",) + PREPOSITIONS + (FUTURE,):
            for det in ("", DETERMINER):
                if prep == FUTURE and det:
                    continue
                parts = tuple(p for p in (conj, prep, det) if p)
                out.append(parts)
    # longest total first, then fewest pieces
    out.sort(key=lambda ps: (-sum(map(len, ps)), len(ps)))
    return out


_PREFIX_CANDIDATES = _prefix_candidates()


def _prefix_ok(parts: tuple[str, ...], rest: int) -> bool:
    if not parts:
        return True
    if DETERMINER in parts:
        return rest >= 2
    has_conj = parts[0] in CONJUNCTIONS
    has_prep = any(p in PREPOSITIONS or p == FUTURE for p in parts)
    if has_prep:
        # a bare single-letter proclitic is too ambiguous without a conjunction
        return has_conj and rest >= 4
    return rest >= 3


def segment(word: str) -> Segmentation:
    """Longest-match affix stripping that always keeps a stem of two or more letters."""
    if not is_arabic_word(word) or len(word) < 3:
        return Segmentation((), word)
    prefixes: tuple[str, ...] = ()
    for parts in _PREFIX_CANDIDATES:
        head = "".join(parts)
        if word.startswith(head) and _prefix_ok(parts, len(word) - len(head)):
            prefixes = parts
            break
    rest = word[sum(map(len, prefixes)):]

    suffixes: tuple[str, ...] = ()
    if DETERMINER not in prefixes:
        for pron in PRONOUNS:
            if rest.endswith(pron) and len(rest) - len(pron) >= 3:
                suffixes = (pron,)
                rest = rest[: -len(pron)]
                break

    noun_suffixes: tuple[str, ...] = ()
    if suffixes and rest.endswith(BOUND_FEMININE) and len(rest) >= 4:
        noun_suffixes = (BOUND_FEMININE,)
        rest = rest[:-1]
    else:
        for nsuff in NOUN_SUFFIXES:
            if rest.endswith(nsuff) and len(rest) - len(nsuff) >= 3:
                noun_suffixes = (nsuff,)
                rest = rest[: -len(nsuff)]
                break
    return Segmentation(prefixes, rest, noun_suffixes, suffixes)


def split_tags(pos: str) -> list[str]:
    return [t.strip() for t in pos.split("+") if t.strip()]


def parse_segmentation(text: str, pos: str | None = None) -> Segmentation:
    """Read a gold segmentation such as ``w+b+mktb+t+nA``.

    With a POS string the stem is the first segment whose tag is not a
    prefix tag and ``NSUFF`` segments after it are noun suffixes.  Without
    one the affix inventories decide.
    """
    segs = [s for s in text.split("+") if s]
    if not segs:
        raise AnnotationMismatch(f"empty segmentation {text!r}")
    if pos:
        tags = split_tags(pos)
        if len(tags) != len(segs):
            raise AnnotationMismatch(f"{len(segs)} segments but {len(tags)} POS tags in {text!r}")
        i = 0
        while i < len(segs) - 1 and tags[i] in PREFIX_TAGS:
            i += 1
        j = i + 1
        nsuff = []
        while j < len(segs) and tags[j] == NSUFF_TAG:
            nsuff.append(segs[j])
            j += 1
        return Segmentation(tuple(segs[:i]), segs[i], tuple(nsuff), tuple(segs[j:]))

    i = 0
    while i < len(segs) - 1 and segs[i] in AFFIX_POS:
        i += 1
    end = len(segs)
    while end - 1 > i and segs[end - 1] in PRONOUNS:
        end -= 1
    nend = end
    while nend - 1 > i and (segs[nend - 1] in NOUN_SUFFIXES or segs[nend - 1] == BOUND_FEMININE):
        nend -= 1
    return Segmentation(tuple(segs[:i]), "".join(segs[i:nend]), tuple(segs[nend:end]), tuple(segs[end:]))


# --- stem templates --------------------------------------------------------

ROOT_SLOTS = frozenset("fEl")


def load_templates() -> tuple[str, ...]:
    return _parse_templates(read_resource("templates.tsv"))


@lru_cache(maxsize=8)
def _parse_templates(text: str) -> tuple[str, ...]:
    out = []
    for line in text.splitlines():
        if not line or line.startswith("#") or line.startswith("template\t"):
            continue
        out.append(line.split("\t")[0])
    return tuple(out)


def _template_matches(template: str, stem: str) -> bool:
    if len(template) != len(stem):
        return False
    return all(t in ROOT_SLOTS or t == s for t, s in zip(template, stem))


def stem_template(stem: str, templates=None) -> str:
    """Best matching template for ``stem``; more fixed letters win, then inventory order."""
    best, best_fixed = UNK_TEMPLATE, -1
    for template in templates or load_templates():
        if _template_matches(template, stem):
            fixed = sum(t not in ROOT_SLOTS for t in template)
            if fixed > best_fixed:
                best, best_fixed = template, fixed
    return best


# --- annotators --------------------------------------------------------------

def _naive_annotation(word: str) -> MorphoAnnotation:
    if not is_arabic_word(word):
        return MorphoAnnotation(Segmentation((), word), word_pos=token_class(word), stem_pos=token_class(word))
    seg = segment(word)
    gender, number = UNKNOWN, UNKNOWN
    if seg.noun_suffixes:
        gender, number = GENDER_NUMBER.get(seg.noun_suffixes[-1], (UNKNOWN, UNKNOWN))
    return MorphoAnnotation(
        segmentation=seg,
        prefix_pos=tuple(AFFIX_POS[p] for p in seg.prefixes),
        suffix_pos=("PRON",) * len(seg.suffixes),
        gender=gender,
        number=number,
        stem_template=stem_template(seg.ce_stem),
    )


_GENDERS = {"m": "m", "masc": "m", "masculine": "m", "f": "f", "fem": "f", "feminine": "f"}
_NUMBERS = {"s": "sg", "sg": "sg", "singular": "sg", "d": "du", "du": "du", "dual": "du",
            "p": "pl", "pl": "pl", "plural": "pl"}


def parse_gender_number(text: str | None) -> tuple[str, str]:
    """Accepts ``f/sg``, ``feminine/singular`` or two-letter codes like ``FS``."""
    if not text:
        return UNKNOWN, UNKNOWN
    text = text.strip().lower()
    if "/" in text:
        g, _, n = text.partition("/")
    elif len(text) == 2:
        g, n = text[0], text[1]
    else:
        return UNKNOWN, UNKNOWN
    return _GENDERS.get(g.strip(), UNKNOWN), _NUMBERS.get(n.strip(), UNKNOWN)


class Annotator:
    """Base annotator.  Immutable after construction and safe to share."""

    name = "base"
    capabilities: frozenset[str] = frozenset()

    def segment(self, word: str) -> Segmentation:
        raise NotImplementedError

    def annotate(self, words, gold=None) -> list[MorphoAnnotation]:
        raise NotImplementedError


class NaiveAnnotator(Annotator):
    name = "naive"
    capabilities = frozenset({"segmentation", "affix_pos", "gender_number", "stem_template"})

    def segment(self, word: str) -> Segmentation:
        return _naive_annotation(word).segmentation

    def annotate(self, words, gold=None) -> list[MorphoAnnotation]:
        if gold is not None and len(gold) != len(words):
            raise AnnotationMismatch(f"{len(words)} words but {len(gold)} gold rows")
        return [_naive_annotation(w) for w in words]


class GoldAnnotator(NaiveAnnotator):
    """Uses gold TSV columns when a token has them; naive analysis otherwise."""

    name = "gold"
    capabilities = NaiveAnnotator.capabilities | {"word_pos", "stem_pos"}

    def annotate(self, words, gold=None) -> list[MorphoAnnotation]:
        if gold is None:
            return super().annotate(words)
        if len(gold) != len(words):
            raise AnnotationMismatch(f"{len(words)} words but {len(gold)} gold rows")
        return [self._annotate_one(w, g) for w, g in zip(words, gold)]

    def _annotate_one(self, word: str, gold) -> MorphoAnnotation:
        if not gold or not (gold.get("segmentation") or gold.get("pos")):
            return _naive_annotation(word)
        base = _naive_annotation(word)
        pos = gold.get("pos") or None
        seg = base.segmentation
        if gold.get("segmentation"):
            seg = parse_segmentation(gold["segmentation"], pos)
            if seg.word != word:
                raise AnnotationMismatch(f"segmentation {gold['segmentation']!r} does not spell {word!r}")
        gender, number = parse_gender_number(gold.get("gender_number"))
        if gender == UNKNOWN and number == UNKNOWN:
            gender, number = base.gender, base.number
        if pos and len(split_tags(pos)) == len(seg.segments):
            tags = split_tags(pos)
            np_ = len(seg.prefixes)
            ns = len(seg.noun_suffixes)
            prefix_pos = tuple(tags[:np_])
            stem_pos = "+".join(tags[np_: np_ + 1 + ns])
            suffix_pos = tuple(tags[np_ + 1 + ns:])
            word_pos = pos
        else:
            prefix_pos = tuple(AFFIX_POS.get(p, UNKNOWN) for p in seg.prefixes)
            suffix_pos = ("PRON",) * len(seg.suffixes)
            stem_pos = UNKNOWN
            word_pos = pos or UNKNOWN
        template = stem_template(seg.ce_stem) if is_arabic_word(word) else UNK_TEMPLATE
        return MorphoAnnotation(seg, word_pos, stem_pos, prefix_pos, suffix_pos, gender, number, template)


ANNOTATORS = {"naive": NaiveAnnotator, "gold": GoldAnnotator}


def make_annotator(name: str) -> Annotator:
    try:
        return ANNOTATORS[name]()
    except KeyError:
        raise ValueError(f"unknown annotator {name!r}; choose from {sorted(ANNOTATORS)}") from None
