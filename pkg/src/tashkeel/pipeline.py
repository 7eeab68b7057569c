"""Training and inference for the two models and their composition into full diacritization."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import container
from .ce_features import CeEncoder, build_sukun_list, sentence_rows
from .codec import SHADDA, VIRTUAL, DiacritizedWord, join_combo, split_combo
from .corpus import Lexicon, PriorTable, SentenceRecord, build_lexicon, build_prior_table, split_validation
from .cw_features import CwEncoder, encode_cw, with_ce_slots
from .errors import EmptyCorpus
from .morpho import make_annotator
from .nn import ModelConfig, SequenceModel, TrainConfig, predict_all, train
from .postcorrect import CorrectionPolicy, post_correct
from .datafiles import read_resource

log = logging.getLogger(__name__)

CW_MODEL = "cw.model"
CE_MODEL = "ce.model"
PRIORS = "priors.bin"
LEXICON = "lexicon.bin"
SUKUN_LIST = "sukun.txt"
HISTORY = "history.tsv"


def default_gazetteer() -> frozenset[str]:
    text = read_resource("ne_sample.txt")
    return frozenset(line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#"))


def _split(records, val_fraction: float, seed: int):
    records = list(records)
    if not records:
        raise EmptyCorpus("training corpus has no sentences")
    if len(records) < 2:
        return records, records
    train_part, val_part = split_validation(records, val_fraction, seed)
    if not val_part:
        val_part = train_part[-1:]
    return train_part, val_part


# --- core-word model ------------------------------------------------------------

@dataclass
class CwBundle:
    model: SequenceModel
    encoder: CwEncoder
    priors: PriorTable
    lexicon: Lexicon
    annotator: str = "naive"
    history: list = field(default_factory=list)

    def save(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.model.save(out / CW_MODEL)
        self.priors.save(out / PRIORS)
        self.lexicon.save(out / LEXICON)

    @classmethod
    def load(cls, out_dir) -> "CwBundle":
        out = Path(out_dir)
        model = SequenceModel.load(out / CW_MODEL)
        return cls(model, CwEncoder.from_json(model.meta["encoder"]), PriorTable.load(out / PRIORS),
                   Lexicon.load(out / LEXICON), model.meta["annotator"])


def cw_examples(records, priors, annotator):
    """Per-record lists of CwExample chunks."""
    return [encode_cw(rec, priors, annotator) for rec in records]


def train_cw(records, annotator: str = "naive", feature_set: str = "all", cfg: TrainConfig = TrainConfig(),
             val_fraction: float = 0.05, model_kw=None, on_epoch=None) -> CwBundle:
    """Train the character-level core-word model.

    Priors and lexicon come from every given sentence; the network is
    trained on a seeded random split with early stopping on the rest.
    """
    records = list(records)
    annot = make_annotator(annotator)
    priors = build_prior_table(records, annot)
    lexicon = build_lexicon(records)
    train_part, val_part = _split(records, val_fraction, cfg.seed)
    train_ex = [ex for exs in cw_examples(train_part, priors, annot) for ex in exs]
    val_ex = [ex for exs in cw_examples(val_part, priors, annot) for ex in exs]
    encoder = CwEncoder.fit(train_ex, feature_set)
    config = ModelConfig.cw(encoder.vocab_sizes(), label_count=len(encoder.labels), **(model_kw or {}))
    model = SequenceModel.init(config, seed=cfg.seed)
    model, history = train(model, [encoder.encode(e) for e in train_ex], [encoder.encode(e) for e in val_ex],
                           cfg, on_epoch=on_epoch)
    model.meta.update({"encoder": encoder.to_json(), "feature_set": feature_set, "annotator": annotator})
    return CwBundle(model, encoder, priors, lexicon, annotator, history)


def predict_cw(bundle: CwBundle, records, policy: CorrectionPolicy = CorrectionPolicy(enabled=False),
               batch_size: int = 256) -> list[list[DiacritizedWord]]:
    """Core-word marks per token; the CE slot carries at most a shadda.

    Tokens come back with ``ce_index`` set from the annotator's segmentation.
    """
    annot = make_annotator(bundle.annotator)
    records = list(records)
    anns = [rec.annotate(annot) for rec in records]
    chunks = [encode_cw(rec, bundle.priors, annot, annotations=a) for rec, a in zip(records, anns)]
    flat = [(si, ex) for si, exs in enumerate(chunks) for ex in exs]
    preds = predict_all(bundle.model, [(bundle.encoder.encode(ex)[0], None) for _, ex in flat], batch_size)

    marks = [[list(t.marks) if not t.arabic else [""] * len(t.bare) for t in rec.tokens] for rec in records]
    for (si, ex), pred in zip(flat, preds):
        for pos, label_id in zip(ex.positions, pred):
            if pos is not None:
                ti, li = pos
                if records[si].tokens[ti].arabic:
                    marks[si][ti][li] = bundle.encoder.labels.token(int(label_id))
    out = []
    for rec, a, sent_marks in zip(records, anns, marks):
        words = []
        for tok, m in zip(with_ce_slots(rec.tokens, a), sent_marks):
            if not tok.arabic:
                words.append(tok)
                continue
            w = tok.with_marks(m)
            if w.ce_index is not None:
                shadda, _ = split_combo(w.marks[w.ce_index])
                w = w.with_marks(w.marks[: w.ce_index] + (SHADDA if shadda else "",) + w.marks[w.ce_index + 1:])
            words.append(post_correct(w.bare, w, bundle.lexicon, policy))
        out.append(words)
    return out


# --- case-ending model ----------------------------------------------------------

@dataclass
class CeBundle:
    model: SequenceModel
    encoder: CeEncoder
    sukun_words: frozenset
    named_entities: frozenset
    annotator: str = "naive"
    history: list = field(default_factory=list)

    def save(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.model.save(out / CE_MODEL)
        container.atomic_write_text(out / SUKUN_LIST, "".join(w + "\n" for w in sorted(self.sukun_words)))

    @classmethod
    def load(cls, out_dir) -> "CeBundle":
        model = SequenceModel.load(Path(out_dir) / CE_MODEL)
        m = model.meta
        return cls(model, CeEncoder.from_json(m["encoder"]), frozenset(m["sukun_words"]),
                   frozenset(m["named_entities"]), m["annotator"])


def _ce_data(records, annot, sukun, ne):
    out = []
    for rec in records:
        out.append(sentence_rows(rec, rec.annotate(annot), sukun, ne))
    return out


def train_ce(records, annotator: str = "naive", feature_set: str = "all-misc", cfg: TrainConfig = TrainConfig(),
             val_fraction: float = 0.05, named_entities=None, model_kw=None, on_epoch=None) -> CeBundle:
    records = list(records)
    annot = make_annotator(annotator)
    ne = frozenset(named_entities) if named_entities is not None else default_gazetteer()
    sukun = build_sukun_list(records, annot)
    train_part, val_part = _split(records, val_fraction, cfg.seed)
    train_rows = _ce_data(train_part, annot, sukun, ne)
    val_rows = _ce_data(val_part, annot, sukun, ne)
    encoder = CeEncoder.fit([r for rows, _ in train_rows for r in rows], feature_set)
    config = ModelConfig.ce(encoder.vocab_sizes(), **(model_kw or {}))
    model = SequenceModel.init(config, seed=cfg.seed)
    model, history = train(model, [encoder.encode(r, lab) for r, lab in train_rows if r],
                           [encoder.encode(r, lab) for r, lab in val_rows if r], cfg, on_epoch=on_epoch)
    model.meta.update({"encoder": encoder.to_json(), "feature_set": feature_set, "annotator": annotator,
                       "sukun_words": sorted(sukun), "named_entities": sorted(ne)})
    return CeBundle(model, encoder, sukun, ne, annotator, history)


def predict_ce(bundle: CeBundle, records, batch_size: int = 256) -> list[list[str]]:
    """CE label per token; non-Arabic tokens always get the virtual label."""
    annot = make_annotator(bundle.annotator)
    records = list(records)
    data = _ce_data(records, annot, bundle.sukun_words, bundle.named_entities)
    encoded = [(bundle.encoder.encode(rows)[0], None) for rows, _ in data]
    nonempty = [i for i, (rows, _) in enumerate(data) if rows]
    preds = predict_all(bundle.model, [encoded[i] for i in nonempty], batch_size) if nonempty else []
    out: list[list[str]] = [[] for _ in records]
    for i, pred in zip(nonempty, preds):
        out[i] = [bundle.encoder.labels.token(int(p)) if tok.arabic else VIRTUAL
                  for tok, p in zip(records[i].tokens, pred)]
    return out


def attach_ce_slots(records, annotator: str = "naive") -> list[list[DiacritizedWord]]:
    """Tokens of each record with their case-ending slot set by ``annotator``."""
    annot = make_annotator(annotator)
    return [with_ce_slots(rec.tokens, rec.annotate(annot)) for rec in records]


# --- composition ----------------------------------------------------------------

def compose_word(cw: DiacritizedWord, ce: str) -> DiacritizedWord:
    """Put CE label ``ce`` on the slot of a core-word prediction.

    A virtual label leaves the slot with only the CW shadda; otherwise the
    shadda of either model is kept and the vowel comes from the CE label.
    """
    if not cw.arabic or cw.ce_index is None:
        return cw
    i = cw.ce_index
    cw_shadda, _ = split_combo(cw.marks[i])
    if ce == VIRTUAL:
        slot = SHADDA if cw_shadda else ""
    else:
        ce_shadda, vowel = split_combo(ce)
        slot = join_combo(cw_shadda or ce_shadda, vowel)
    return cw.with_marks(cw.marks[:i] + (slot,) + cw.marks[i + 1:])


def compose(cw_sentences, ce_sentences):
    return [[compose_word(w, c) for w, c in zip(ws, cs)] for ws, cs in zip(cw_sentences, ce_sentences)]


class Diacritizer:
    """CW model, optional post-correction and CE model chained over a corpus."""

    def __init__(self, cw: CwBundle, ce: CeBundle | None = None, post_correct: bool = True):
        self.cw = cw
        self.ce = ce
        self.policy = CorrectionPolicy(enabled=post_correct)

    @classmethod
    def load(cls, cw_dir, ce_dir=None, post_correct: bool = True) -> "Diacritizer":
        return cls(CwBundle.load(cw_dir), CeBundle.load(ce_dir) if ce_dir else None, post_correct)

    def diacritize(self, records) -> list[list[DiacritizedWord]]:
        records = list(records)
        cw = predict_cw(self.cw, records, self.policy)
        if self.ce is None:
            return cw
        return compose(cw, predict_ce(self.ce, records))

    def diacritize_records(self, records) -> list[SentenceRecord]:
        records = list(records)
        out = []
        for rec, words in zip(records, self.diacritize(records)):
            out.append(SentenceRecord(tuple(words), rec.raw, rec.source_id, rec.script, rec.gold))
        return out

