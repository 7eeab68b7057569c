"""Arabic diacritization with a character-level core-word biLSTM and a word-level case-ending biLSTM."""

__version__ = "0.1.0"

from .codec import DiacritizedWord, arabic_to_bw, bw_to_arabic, decompose, recompose  # noqa: E402
from .corpus import Lexicon, PriorTable, SentenceRecord, load_corpus  # noqa: E402
from .scoring import confusion, relaxed_normalize, score  # noqa: E402

__all__ = [
    "__version__", "DiacritizedWord", "arabic_to_bw", "bw_to_arabic", "decompose", "recompose",
    "Lexicon", "PriorTable", "SentenceRecord", "load_corpus", "confusion", "relaxed_normalize", "score",
]
