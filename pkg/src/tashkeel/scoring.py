"""Relaxed WER/DER/CEER scoring and case-ending confusion reports.

Relaxed scoring treats an empty case ending as sukun and drops the
"default" diacritics: fatHa before alef, kasra before ya, damma before waw.

DER is the number of mismatching mark positions divided by the number of
compared letters of Arabic tokens: every letter in full mode, every letter
except the case-ending slot in CW mode.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .codec import CE_LABELS, NO_MARK, SUKUN, VIRTUAL, DiacritizedWord, join_combo, split_combo
from .errors import AlignmentError

MODES = ("cw", "ce", "full")
DEFAULT_DIACRITICS = {("a", "A"), ("i", "y"), ("u", "w")}
DER_DEFINITION = ("DER = mismatching marks / compared letters of Arabic tokens "
                  "(all letters in full mode, all but the case-ending slot in cw mode)")


def relaxed_normalize(w: DiacritizedWord) -> DiacritizedWord:
    if not w.arabic:
        return w
    marks = list(w.marks)
    for i in range(len(marks) - 1):
        shadda, vowel = split_combo(marks[i])
        if (vowel, w.bare[i + 1]) in DEFAULT_DIACRITICS:
            marks[i] = join_combo(shadda, NO_MARK)
    if w.ce_index is not None and marks[w.ce_index] in (NO_MARK, VIRTUAL):
        marks[w.ce_index] = SUKUN
    return w.with_marks(marks)


def ce_of(w: DiacritizedWord) -> str:
    if not w.arabic or w.ce_index is None:
        return VIRTUAL
    return w.marks[w.ce_index] or VIRTUAL


@dataclass
class ScoreReport:
    mode: str
    token_count: int = 0
    error_count: int = 0
    char_count: int = 0
    char_errors: int = 0

    @property
    def wer(self) -> float:
        return self.error_count / self.token_count if self.token_count else 0.0

    @property
    def der(self) -> float | None:
        if self.mode == "ce":
            return None
        return self.char_errors / self.char_count if self.char_count else 0.0

    @property
    def ceer(self) -> float | None:
        return self.wer if self.mode == "ce" else None

    def merge(self, other: "ScoreReport") -> "ScoreReport":
        return ScoreReport(self.mode, self.token_count + other.token_count, self.error_count + other.error_count,
                           self.char_count + other.char_count, self.char_errors + other.char_errors)

    def render_text(self) -> str:
        lines = [f"# mode: {self.mode}"] + ([] if self.mode == "ce" else [f"# {DER_DEFINITION}"])
        if self.mode == "ce":
            lines.append(f"CEER  {100 * self.ceer:6.2f}%  ({self.error_count}/{self.token_count} words)")
        else:
            lines.append(f"WER   {100 * self.wer:6.2f}%  ({self.error_count}/{self.token_count} words)")
            lines.append(f"DER   {100 * self.der:6.2f}%  ({self.char_errors}/{self.char_count} letters)")
        return "\n".join(lines) + "\n"

    def render_tsv(self) -> str:
        rows = [("mode", self.mode), ("tokens", self.token_count), ("word_errors", self.error_count),
                ("letters", self.char_count), ("letter_errors", self.char_errors)]
        if self.mode == "ce":
            rows.append(("ceer", f"{self.ceer:.6f}"))
        else:
            rows += [("wer", f"{self.wer:.6f}"), ("der", f"{self.der:.6f}")]
        return "metric\tvalue\n" + "".join(f"{k}\t{v}\n" for k, v in rows)


def _tokens(sentence):
    return sentence.tokens if hasattr(sentence, "tokens") else sentence


def aligned_pairs(ref, hyp, relaxed: bool = True):
    """Yield aligned (ref_word, hyp_word) pairs sharing one CE slot.

    The reference slot wins; a reference token without one takes the
    hypothesis slot.
    """
    if len(ref) != len(hyp):
        raise AlignmentError(min(len(ref), len(hyp)), 0, f"{len(ref)} reference vs {len(hyp)} hypothesis sentences")
    for s, (rs, hs) in enumerate(zip(ref, hyp)):
        rt, ht = _tokens(rs), _tokens(hs)
        if len(rt) != len(ht):
            raise AlignmentError(s, min(len(rt), len(ht)), f"{len(rt)} vs {len(ht)} tokens")
        for t, (r, h) in enumerate(zip(rt, ht)):
            if r.bare != h.bare or r.arabic != h.arabic:
                raise AlignmentError(s, t, f"{r.bare!r} vs {h.bare!r}")
            slot = r.ce_index if r.ce_index is not None else h.ce_index
            r, h = r.with_ce_index(slot), h.with_ce_index(slot)
            if relaxed:
                r, h = relaxed_normalize(r), relaxed_normalize(h)
            yield r, h


def score(ref, hyp, mode: str = "full", relaxed: bool = True) -> ScoreReport:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    rep = ScoreReport(mode)
    for r, h in aligned_pairs(ref, hyp, relaxed):
        if mode == "ce":
            rep.token_count += 1
            rep.error_count += ce_of(r) != ce_of(h)
            continue
        if not r.arabic:
            continue
        positions = [i for i in range(len(r.bare)) if mode == "full" or i != r.ce_index]
        wrong = sum(r.marks[i] != h.marks[i] for i in positions)
        rep.token_count += 1
        rep.error_count += wrong > 0
        rep.char_count += len(positions)
        rep.char_errors += wrong
    return rep


@dataclass
class ConfusionReport:
    matrix: Counter = field(default_factory=Counter)

    @property
    def labels(self) -> list[str]:
        seen = {lab for pair in self.matrix for lab in pair}
        return [lab for lab in CE_LABELS if lab in seen]

    @property
    def error_count(self) -> int:
        return sum(n for (r, h), n in self.matrix.items() if r != h)

    @property
    def total(self) -> int:
        return sum(self.matrix.values())

    def frequency(self) -> dict[str, int]:
        out = Counter()
        for (r, _), n in self.matrix.items():
            out[r] += n
        return dict(out)

    def accuracy(self) -> dict[str, float]:
        freq = self.frequency()
        return {lab: self.matrix[(lab, lab)] / n for lab, n in freq.items()}

    def full_matrix(self) -> list[list[int]]:
        return [[self.matrix[(r, h)] for h in CE_LABELS] for r in CE_LABELS]

    def error_pairs(self) -> list[tuple[str, str, int]]:
        """Off-diagonal counts with both directions summed, largest first."""
        rank = {lab: i for i, lab in enumerate(CE_LABELS)}
        agg = Counter()
        for (r, h), n in self.matrix.items():
            if r != h:
                a, b = sorted((r, h), key=rank.__getitem__)
                agg[(a, b)] += n
        return sorted(((a, b, n) for (a, b), n in agg.items()), key=lambda x: (-x[2], rank[x[0]], rank[x[1]]))

    def render_text(self, min_share: float = 0.0) -> str:
        errors = self.error_count
        lines = ["Error\tCount\t%"]
        for a, b, n in self.error_pairs():
            share = n / errors if errors else 0.0
            if share >= min_share:
                lines.append(f"{a} ⇔ {b}\t{n}\t{100 * share:.1f}")
        lines.append("")
        lines.append("Label\tCount\tFreq%\tAcc%")
        total = self.total
        acc = self.accuracy()
        for lab, n in sorted(self.frequency().items(), key=lambda kv: (-kv[1], CE_LABELS.index(kv[0]))):
            lines.append(f"{lab}\t{n}\t{100 * n / total:.1f}\t{100 * acc[lab]:.1f}")
        return "\n".join(lines) + "\n"

    def render_tsv(self) -> str:
        lines = ["reference\thypothesis\tcount"]
        for r in CE_LABELS:
            for h in CE_LABELS:
                if self.matrix[(r, h)]:
                    lines.append(f"{r}\t{h}\t{self.matrix[(r, h)]}")
        return "\n".join(lines) + "\n"


def confusion(ref, hyp, relaxed: bool = True) -> ConfusionReport:
    rep = ConfusionReport()
    for r, h in aligned_pairs(ref, hyp, relaxed):
        rep.matrix[(ce_of(r), ce_of(h))] += 1
    return rep
