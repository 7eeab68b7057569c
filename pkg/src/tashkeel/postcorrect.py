"""Unigram-lexicon post-correction of core-word predictions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .codec import DiacritizedWord, decompose
from .corpus import Lexicon


@dataclass(frozen=True)
class CorrectionPolicy:
    enabled: bool = True
    scope: str = "seen-words-only"

    def __post_init__(self):
        if self.scope != "seen-words-only":
            raise ValueError("only the seen-words-only scope is supported")


def _core(marks, ce_index):
    if ce_index is None:
        return tuple(marks)
    out = list(marks)
    out[ce_index] = ""
    return tuple(out)


def core_form_counts(lex: Lexicon, bare: str, ce_index: int | None) -> Counter:
    """Lexicon counts of ``bare`` aggregated by core marks (CE slot blanked)."""
    counts: Counter = Counter()
    for form, n in lex.forms(bare).items():
        counts[_core(decompose(form).marks, ce_index)] += n
    return counts


def post_correct(bare: str, predicted: DiacritizedWord, lex: Lexicon,
                 policy: CorrectionPolicy = CorrectionPolicy()) -> DiacritizedWord:
    """Replace an unseen core form of a seen word by its most frequent seen core form.

    The case-ending mark of the prediction is kept; ties between equally
    frequent forms go to the lexicographically smallest.
    """
    if predicted.bare != bare:
        raise ValueError(f"prediction {predicted.bare!r} is not for word {bare!r}")
    if not policy.enabled or not predicted.arabic or bare not in lex:
        return predicted
    counts = core_form_counts(lex, bare, predicted.ce_index)
    if predicted.core_marks() in counts:
        return predicted
    best = min(counts.items(), key=lambda kv: (-kv[1], DiacritizedWord(bare, kv[0]).text))[0]
    marks = list(best)
    if predicted.ce_index is not None:
        marks[predicted.ce_index] = predicted.marks[predicted.ce_index]
    return predicted.with_marks(marks)
