"""Seeded synthetic TSV corpora with gold morphology.

The generated language is built so that surface characters alone cannot
decide the answer:

* every bare form ``b<stem>`` is either the preposition ``b+`` on a
  3-letter stem or an unrelated 4-letter stem, chosen at random per
  occurrence; only the segmentation tells them apart;
* the case ending of an unprefixed stem follows its POS tag (NOUN -> u,
  ADJ -> a), drawn at random per occurrence; after the preposition it is
  always kasra.
"""

from __future__ import annotations

import random

from .codec import recompose, DiacritizedWord

CONSONANTS = "tjHxdrzs$SDTZEgfqkmnh"
CORE_VOWELS = ("a", "i", "u", "o")
POS_CASE = {"NOUN": "u", "ADJ": "a"}
PREP = "b"


def _stem_marks(rng: random.Random, n: int) -> list[str]:
    marks = [rng.choice(("a", "i", "u"))]
    marks += [rng.choice(CORE_VOWELS) for _ in range(n - 2)]
    return marks + [""]


class SyntheticLanguage:
    def __init__(self, n_stems: int = 30, seed: int = 0):
        rng = random.Random(seed)
        stems = set()
        while len(stems) < n_stems:
            stems.add("".join(rng.choice(CONSONANTS) for _ in range(3)))
        self.stems = sorted(stems)
        self.short = {s: _stem_marks(rng, 3) for s in self.stems}
        # the homograph stem reads its first letter with fatHa, unlike the preposition's kasra
        self.long = {s: ["a"] + _stem_marks(rng, 3) for s in self.stems}

    def word(self, rng: random.Random) -> tuple[str, str, str, str]:
        """One token as (bare, diacritized, segmentation, pos)."""
        stem = rng.choice(self.stems)
        kind = rng.random()
        if kind < 0.4:
            pos = rng.choice(sorted(POS_CASE))
            marks = self.short[stem][:-1] + [POS_CASE[pos]]
            return stem, recompose(DiacritizedWord(stem, tuple(marks))), stem, pos
        if kind < 0.7:
            marks = ["i"] + self.short[stem][:-1] + ["i"]
            bare = PREP + stem
            return bare, recompose(DiacritizedWord(bare, tuple(marks))), f"{PREP}+{stem}", "PREP+NOUN"
        pos = rng.choice(sorted(POS_CASE))
        bare = PREP + stem
        marks = self.long[stem][:-1] + [POS_CASE[pos]]
        return bare, recompose(DiacritizedWord(bare, tuple(marks))), bare, pos

    def sentence_rows(self, rng: random.Random, min_len: int = 4, max_len: int = 8) -> list[str]:
        rows = []
        for _ in range(rng.randint(min_len, max_len)):
            bare, diac, seg, pos = self.word(rng)
            rows.append(f"{bare}\t{diac}\t{seg}\t{pos}\t")
        rows.append(".\t.\t.\tPUNC\t")
        return rows


def synthetic_tsv(n_sentences: int, seed: int = 0, language: SyntheticLanguage | None = None) -> str:
    """TSV corpus text (token, diacritized, segmentation, pos, gender_number)."""
    lang = language or SyntheticLanguage(seed=seed)
    rng = random.Random(f"sentences-{seed}")
    blocks = ["\n".join(lang.sentence_rows(rng)) for _ in range(n_sentences)]
    return "\n\n".join(blocks) + "\n"


def synthetic_split(n_train: int, n_test: int, seed: int = 0) -> tuple[str, str]:
    """Train and held-out TSV texts drawn from one language."""
    lang = SyntheticLanguage(seed=seed)
    return (synthetic_tsv(n_train, seed, lang), synthetic_tsv(n_test, seed + 7919, lang))
