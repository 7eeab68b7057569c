"""Acceptance gate: one test per primary criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in the
terminal summary under "acceptance criteria".
"""

import os
import random
import shutil
import statistics
import subprocess
import sys
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from tashkeel.codec import COMBOS, DiacritizedWord, arabic_to_bw, bw_to_arabic, decompose, foreign_word, recompose
from tashkeel.corpus import SentenceRecord, build_lexicon, build_prior_table, load_corpus
from tashkeel.cw_features import CwEncoder, encode_cw, render_seg_labels
from tashkeel.ce_features import CeEncoder, build_sukun_list, sentence_rows
from tashkeel.morpho import NaiveAnnotator, make_annotator, segment
from tashkeel.nn import ModelConfig, SequenceModel, TrainConfig, train
from tashkeel.nn.train import accuracy
from tashkeel.pipeline import attach_ce_slots, compose, predict_ce, predict_cw, train_ce, train_cw
from tashkeel.postcorrect import post_correct
from tashkeel.scoring import score
from tashkeel.synthetic import synthetic_split, synthetic_tsv

from gradcheck import max_relative_error, tiny_model

RESULTS: dict[int, str] = {}
NAIVE = NaiveAnnotator()


def verdict(n, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {title} -- {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def rand_word(rng, alphabet, lo=1, hi=7, combos=COMBOS):
    bare = "".join(rng.choice(alphabet) for _ in range(rng.randint(lo, hi)))
    return DiacritizedWord(bare, tuple(rng.choice(combos) for _ in bare))


def tsv_records(path, text):
    path.write_text(text, encoding="utf-8")
    return load_corpus(path, "tsv")


# --- 1 ----------------------------------------------------------------------------

def test_c01_codec_round_trip():
    rng = random.Random(20240101)
    alphabet = "'|>&<}AbptvjHxd*rzs$SDTZEg_fqklmnhwYy{"
    words = [recompose(rand_word(rng, alphabet.replace("_", ""))) for _ in range(10_000)]
    start = time.perf_counter()
    failures = sum(recompose(decompose(w)) != w or arabic_to_bw(bw_to_arabic(w)) != w for w in words)
    elapsed = time.perf_counter() - start
    verdict(1, "codec round trip", failures == 0 and elapsed < 5.0,
            f"{failures} failures over {len(words)} words in {elapsed:.2f}s (limit 5s)")


# --- 2 ----------------------------------------------------------------------------

def test_c02_seg_and_prior_examples():
    seg = render_seg_labels(segment("wAlktAb"))
    train_set = [SentenceRecord((decompose("kitaAb"),), "kitaAb"), SentenceRecord((decompose("kut~aAb"),), "kut~aAb")]
    priors = build_prior_table(train_set, NAIVE)
    first = priors.lookup_str("ktAb")[0]
    unseen = priors.lookup_str("qlm")
    ok = seg == "S+BE+BMME" and first == "01100000" and unseen == ["11111111"] * 3
    verdict(2, "SEG/PRIOR examples", ok, f"seg={seg!r} first-letter={first!r} unseen={unseen[0]!r}")


# --- 3 ----------------------------------------------------------------------------

BIT_ORDER = "aiuoKNF~"


def oracle_bits(combo):
    return sum(1 << (7 - BIT_ORDER.index(c)) for c in combo)


def test_c03_prior_replay_soundness():
    rng = random.Random(3)
    pieces = ["w", "f", "b", "l", "Al", "k", "ktb", "drs", "mktb", "qlm", "h", "hA", "nA", "p", "At", "wn", "y"]
    checked = misses = 0
    for _ in range(1000):
        corpus = []
        for _ in range(rng.randint(1, 4)):
            toks = []
            for _ in range(rng.randint(1, 5)):
                bare = "".join(rng.choice(pieces) for _ in range(rng.randint(1, 3)))
                toks.append(DiacritizedWord(bare, tuple(rng.choice(COMBOS) for _ in bare)))
            if rng.random() < 0.3:
                toks.append(foreign_word("."))
            corpus.append(SentenceRecord(tuple(toks), ""))
        table = build_prior_table(corpus, NAIVE)
        for rec in corpus:
            for tok, ann in zip(rec.tokens, rec.annotate(NAIVE)):
                if not tok.arabic:
                    continue
                start = 0
                for piece in ann.segmentation.segments:
                    for i, bits in enumerate(table.lookup(piece)):
                        want = oracle_bits(tok.marks[start + i])
                        checked += 1
                        misses += bits & want != want
                    start += len(piece)
    verdict(3, "prior replay soundness", misses == 0, f"{checked - misses}/{checked} occurrences over 1000 corpora")


# --- 4 ----------------------------------------------------------------------------

def test_c04_gradient_check():
    worst, sizes = 0.0, []
    for seed in range(20):
        model, batch = tiny_model("CW" if seed % 2 == 0 else "CE", seed)
        sizes.append(model.n_params())
        worst = max(worst, max_relative_error(model, batch, dropout_seed=seed if seed % 4 == 3 else None))
    ok = worst < 1e-4 and max(sizes) <= 2000
    verdict(4, "gradient correctness", ok, f"max relative error {worst:.2e} over 20 models, {min(sizes)}-{max(sizes)} params")


# --- 5 ----------------------------------------------------------------------------

MEMORIZE = TrainConfig(max_epochs=200, batch_size=8, patience=200)


@pytest.mark.slow
def test_c05_memorization(tmp_path):
    recs = tsv_records(tmp_path / "toy50.tsv", synthetic_tsv(50, seed=3))
    annot = make_annotator("gold")

    start = time.perf_counter()
    priors = build_prior_table(recs, annot)
    examples = [ex for rec in recs for ex in encode_cw(rec, priors, annot)]
    enc = CwEncoder.fit(examples, "all")
    cw_data = [enc.encode(ex) for ex in examples]
    cw = SequenceModel.init(ModelConfig.cw(enc.vocab_sizes(), label_count=len(enc.labels)), seed=0)
    cw, _ = train(cw, cw_data, cw_data, MEMORIZE)
    cw_acc = accuracy(cw, cw_data)
    cw_time = time.perf_counter() - start

    sukun = build_sukun_list(recs, annot)
    pairs = [sentence_rows(rec, rec.annotate(annot), sukun, frozenset()) for rec in recs]
    ce_enc = CeEncoder.fit([r for rows, _ in pairs for r in rows], "all-misc")
    ce_data = [ce_enc.encode(rows, labels) for rows, labels in pairs]
    ce = SequenceModel.init(ModelConfig.ce(ce_enc.vocab_sizes()), seed=0)
    ce, _ = train(ce, ce_data, ce_data, MEMORIZE)
    ce_acc = accuracy(ce, ce_data)

    ok = cw_acc >= 0.99 and ce_acc >= 0.99 and cw_time < 300
    verdict(5, "memorization", ok, f"CW train accuracy {cw_acc:.4f} in {cw_time:.0f}s, CE (all-misc) {ce_acc:.4f}, "
                                   f"200 epochs, batch 8")


# --- 6 ----------------------------------------------------------------------------

UTILITY_MODEL = {"embed_dim": 16, "lstm_units": 32, "dense_units": 32}


def utility_run(seed, tmp_path):
    train_text, test_text = synthetic_split(2000, 300, seed)
    tr = tsv_records(tmp_path / f"train{seed}.tsv", train_text)
    te = tsv_records(tmp_path / f"test{seed}.tsv", test_text)
    ref = attach_ce_slots(te, "gold")
    out = {}
    for fs in ("all", "char"):
        cfg = TrainConfig(max_epochs=15, batch_size=32, learning_rate=0.005, seed=seed)
        bundle = train_cw(tr, "gold", fs, cfg, model_kw=UTILITY_MODEL)
        out[fs] = score(ref, predict_cw(bundle, te), "cw").wer
    for fs in ("all-misc", "word"):
        cfg = TrainConfig(max_epochs=30, batch_size=32, learning_rate=0.005, seed=seed)
        bundle = train_ce(tr, "gold", fs, cfg, model_kw=UTILITY_MODEL)
        out[fs] = score(ref, compose(ref, predict_ce(bundle, te)), "ce").ceer
    return out


@pytest.mark.slow
def test_c06_feature_utility_ordering(tmp_path):
    runs = [utility_run(seed, tmp_path) for seed in (0, 1, 2)]
    med = {k: statistics.median(r[k] for r in runs) for k in runs[0]}
    ok = med["all"] < med["char"] and med["all-misc"] < med["word"]
    verdict(6, "feature utility ordering", ok,
            f"median CW WER all={med['all']:.3f} char={med['char']:.3f}; "
            f"median CEER all-misc={med['all-misc']:.3f} word={med['word']:.3f}")


# --- 7 ----------------------------------------------------------------------------

def oracle_correct(lex_counts, pred):
    """Independent statement of the post-correction rule for slot-free words."""
    if pred.bare not in lex_counts or pred.text in lex_counts[pred.bare]:
        return pred.text
    counts = lex_counts[pred.bare]
    top = max(counts.values())
    return min(form for form, n in counts.items() if n == top)


def test_c07_post_correction_contract():
    rng = random.Random(7)
    combos = COMBOS[:8]
    alphabet = "ktbdrsqlmn"
    contract_checks = contract_fails = 0
    worse = 0
    for trial in range(100):
        dist = {}
        for _ in range(15):
            base = rand_word(rng, alphabet, 2, 4, combos)
            forms = {base.text: rng.randint(1, 5)}
            for _ in range(rng.randint(0, 2)):
                forms[DiacritizedWord(base.bare, tuple(rng.choice(combos) for _ in base.bare)).text] = rng.randint(1, 5)
            dist[base.bare] = forms
        train_tokens = [decompose(f) for forms in dist.values() for f in forms]
        bag = [f for forms in dist.values() for f, w in forms.items() for _ in range(w)]
        train_tokens += [decompose(rng.choice(bag)) for _ in range(300)]
        lex = build_lexicon([SentenceRecord(tuple(train_tokens), "")])
        lex_counts = {b: dict(lex.forms(b)) for b in dist}

        for _ in range(20):
            bare = rng.choice(list(dist)) if rng.random() < 0.8 else rand_word(rng, "fjHx", 2, 4).bare
            pred = DiacritizedWord(bare, tuple(rng.choice(combos) for _ in bare))
            contract_checks += 1
            contract_fails += post_correct(bare, pred, lex).text != oracle_correct(lex_counts, pred)

        ref_sent = [decompose(rng.choice(bag)) for _ in range(40)]
        hyp_sent = [w if rng.random() < 0.6 else w.with_marks(rng.choice(combos) for _ in w.bare) for w in ref_sent]
        fixed = [post_correct(w.bare, w, lex) for w in hyp_sent]
        raw_wer = score([ref_sent], [hyp_sent], "full").wer
        fixed_wer = score([ref_sent], [fixed], "full").wer
        worse += fixed_wer > raw_wer
    ok = contract_fails == 0 and worse == 0
    verdict(7, "post-correction contract", ok,
            f"{contract_checks - contract_fails}/{contract_checks} contract cases, WER increased in {worse}/100 trials")


# --- 8 ----------------------------------------------------------------------------

MARK_CHARS = set("aiuoKNF~")
DEFAULTS = {"A": "a", "y": "i", "w": "u"}


def naive_units(bw):
    units = []
    for ch in bw:
        if ch in MARK_CHARS:
            units[-1][1].add(ch)
        else:
            units.append((ch, set()))
    return units


def naive_apply_rules(units, slot, relaxed):
    units = [(c, set(m)) for c, m in units]
    if not relaxed:
        return units
    for i in range(len(units) - 1):
        v = DEFAULTS.get(units[i + 1][0])
        if v:
            units[i][1].discard(v)
    if slot is not None and not units[slot][1]:
        units[slot][1].add("o")
    return units


def naive_score(ref, hyp, mode, relaxed):
    tokens = errors = letters = letter_errors = 0
    for rs, hs in zip(ref, hyp):
        for r, h in zip(rs, hs):
            slot = r.ce_index if r.ce_index is not None else h.ce_index
            if not r.arabic:
                if mode == "ce":
                    tokens += 1
                continue
            ru = naive_apply_rules(naive_units(r.text), slot, relaxed)
            hu = naive_apply_rules(naive_units(h.text), slot, relaxed)
            if mode == "ce":
                rl = frozenset(ru[slot][1]) if slot is not None else "#"
                hl = frozenset(hu[slot][1]) if slot is not None else "#"
                if relaxed is False and slot is not None:
                    rl, hl = rl or "#", hl or "#"
                tokens += 1
                errors += rl != hl
                continue
            idx = [i for i in range(len(ru)) if mode == "full" or i != slot]
            bad = sum(ru[i][1] != hu[i][1] for i in idx)
            tokens += 1
            errors += bad > 0
            letters += len(idx)
            letter_errors += bad
    return tokens, errors, letters, letter_errors


def random_pair(rng):
    ref, hyp = [], []
    for _ in range(rng.randint(1, 4)):
        rs, hs = [], []
        for _ in range(rng.randint(1, 6)):
            if rng.random() < 0.1:
                tok = foreign_word(rng.choice([".", "2020", "ABC", "،"]))
                rs.append(tok)
                hs.append(tok)
                continue
            r = rand_word(rng, "ktbAywlm", 1, 6)
            slot = len(r.bare) - 1
            h = r
            if rng.random() < 0.7:
                marks = list(r.marks)
                for i in range(len(marks)):
                    if rng.random() < 0.3:
                        marks[i] = rng.choice(COMBOS)
                h = r.with_marks(marks)
            rs.append(r.with_ce_index(slot if rng.random() < 0.7 else None))
            hs.append(h.with_ce_index(slot if rng.random() < 0.8 else None))
        ref.append(rs)
        hyp.append(hs)
    return ref, hyp


def test_c08_relaxed_scorer_oracle():
    rng = random.Random(8)
    mismatches = rule_hits = 0
    for _ in range(1000):
        ref, hyp = random_pair(rng)
        for mode in ("cw", "ce", "full"):
            for relaxed in (True, False):
                rep = score(ref, hyp, mode, relaxed)
                got = (rep.token_count, rep.error_count) + ((rep.char_count, rep.char_errors) if mode != "ce" else ())
                want = naive_score(ref, hyp, mode, relaxed)
                want = want if mode != "ce" else want[:2]
                mismatches += got != want
        rule_hits += score(ref, hyp, "full", True).error_count != score(ref, hyp, "full", False).error_count
    verdict(8, "relaxed scorer oracle", mismatches == 0 and rule_hits > 0,
            f"{mismatches} mismatches over 1000 pairs x 3 modes x strict/relaxed; relaxation changed {rule_hits} pairs")


# --- 9 ----------------------------------------------------------------------------

def test_c09_early_stopping():
    rng = np.random.default_rng(0)
    cfg_model = ModelConfig.cw((5, 4), label_count=4, embed_dim=3, lstm_units=3, dense_units=3)
    data = [(np.stack([rng.integers(1, 5, 4), rng.integers(1, 4, 4)], axis=1).astype(np.int32),
             rng.integers(0, 4, 4).astype(np.int32)) for _ in range(4)]
    outcomes = []
    for k in (1, 3, 7, 12):
        values = [10.0 - e for e in range(1, k + 1)] + [10.0 - k] * 30
        snaps = {}

        def val(model, epoch):
            snaps[epoch] = {n: p.copy() for n, p in model.params.items()}
            return values[epoch - 1]

        model, history = train(SequenceModel.init(cfg_model, seed=k), data, [],
                               TrainConfig(max_epochs=40, batch_size=2, patience=5), val_loss_fn=val)
        restored = all(np.array_equal(model.params[n], snaps[k][n]) for n in model.params)
        outcomes.append((k, len(history), restored, model.meta["best_epoch"]))
    ok = all(n == k + 5 and restored and best == k for k, n, restored, best in outcomes)
    verdict(9, "early stopping", ok, "; ".join(f"k={k}: stopped at {n}, best {b}, restored={r}"
                                               for k, n, r, b in outcomes))


# --- 10 ---------------------------------------------------------------------------

def run_pipeline(root: Path, hash_seed: str):
    env = dict(os.environ, PYTHONHASHSEED=hash_seed)
    base = [sys.executable, "-m", "tashkeel.cli"]
    common = ["--format", "tsv", "--annotator", "gold", "--config", str(root / "run.cfg")]
    run = root / "run"
    steps = [
        ["train", "--mode", "cw", "--corpus", str(root / "train.tsv"), "--out", str(run / "cw"), *common],
        ["train", "--mode", "ce", "--corpus", str(root / "train.tsv"), "--out", str(run / "ce"), *common],
        ["diacritize", "--input", str(root / "test.tsv"), "--cw", str(run / "cw"), "--ce", str(run / "ce"),
         "--output", str(run / "out.tsv"), "--format", "tsv"],
        ["evaluate", "--ref", str(root / "test.tsv"), "--cw", str(run / "cw"), "--ce", str(run / "ce"),
         "--out", str(run / "eval"), "--format", "tsv"],
    ]
    for step in steps:
        proc = subprocess.run(base + step, env=env, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
    files = {str(p.relative_to(run)): p.read_bytes() for p in sorted(run.rglob("*")) if p.is_file()}
    shutil.rmtree(run)
    return files


def test_c10_determinism(tmp_path):
    train_text, test_text = synthetic_split(40, 10, seed=5)
    (tmp_path / "train.tsv").write_text(train_text, encoding="utf-8")
    (tmp_path / "test.tsv").write_text(test_text, encoding="utf-8")
    (tmp_path / "run.cfg").write_text("seed = 11\nmax-epochs = 4\nbatch-size = 8\nlstm-units = 12\n"
                                      "dense-units = 12\nembed-dim = 8\n", encoding="utf-8")
    first = run_pipeline(tmp_path, "1")
    second = run_pipeline(tmp_path, "2")
    differing = sorted(k for k in first.keys() | second.keys() if first.get(k) != second.get(k))
    has_models = {"cw/cw.model", "ce/ce.model", "cw/manifest.json", "eval/score.tsv"} <= first.keys()
    verdict(10, "determinism", not differing and has_models,
            f"{len(first)} files compared byte for byte, differing: {differing or 'none'}")


# --- 11 ---------------------------------------------------------------------------

def test_c11_length_capping():
    rng = random.Random(11)
    words = []
    while len(" ".join(w.bare for w in words)) < 3000:
        words.append(rand_word(rng, "ktbdrsqlmnAwy", 2, 9))
    text = " ".join(w.bare for w in words)
    rec = SentenceRecord(tuple(words), text)
    chunks = encode_cw(rec, build_prior_table([rec], NAIVE), NAIVE)
    chunk_words = [[p[0] for p in c.positions if p is not None] for c in chunks]
    token_order = [i for ws in chunk_words for i in dict.fromkeys(ws)]
    chunk_chars = [len(" ".join(rec.tokens[i].bare for i in dict.fromkeys(ws))) for ws in chunk_words]
    whole = all(Counter(ws)[i] == len(rec.tokens[i].bare) for ws in chunk_words for i in set(ws))
    ok = (len(text) >= 3000 and token_order == list(range(len(words))) and whole
          and max(chunk_chars) <= 1250 and max(len(c) for c in chunks) <= 1250)
    verdict(11, "length capping", ok, f"{len(text)} chars -> {len(chunks)} chunks of {chunk_chars} chars, "
                                      f"{len(token_order)}/{len(words)} tokens kept in order")
