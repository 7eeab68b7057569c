"""Command-line entry point: train, diacritize, evaluate, report, dump-features, dump-codec.

Exit codes: 0 success, 1 runtime error, 2 usage error.

A ``--config`` file holds ``key = value`` lines (``#`` starts a comment);
keys are option names with dashes or underscores.  Flags on the command
line override the file.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .ce_features import FEATURE_SETS as CE_FEATURE_SETS, sentence_rows
from .codec import VIRTUAL, table_tsv, write_token
from .container import atomic_write_text
from .corpus import build_prior_table, load_corpus
from .cw_features import CW_FEATURE_SETS, dump_rows, encode_cw
from .datafiles import ENV_VAR
from .errors import TashkeelError
from .morpho import ANNOTATORS, make_annotator
from .nn import TrainConfig
from .nn.train import format_history
from .pipeline import (HISTORY, CeBundle, CwBundle, Diacritizer, attach_ce_slots, compose_word, default_gazetteer,
                       predict_ce, predict_cw, train_ce, train_cw)
from .postcorrect import CorrectionPolicy
from .scoring import confusion, score

log = logging.getLogger("tashkeel")

MANIFEST = "manifest.json"
DEFAULT_FEATURE_SET = {"cw": "all", "ce": "all-misc"}
SETUP_NAMES = {"word": "word (baseline)"}

# defaults applied after flags and config file; None means "no default"
DEFAULTS = {
    "format": "plain", "script": "auto", "seed": 0, "annotator": "naive", "post_correct": "on",
    "lr": 0.001, "batch_size": 256, "patience": 5, "max_epochs": 100, "val_fraction": 0.05,
    "mode": None, "feature_set": None, "min_share": 0.0,
}


class UsageError(Exception):
    pass


# --- helpers --------------------------------------------------------------------

def read_config(path) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def resolve(parser: argparse.ArgumentParser, ns: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from the config file, then from DEFAULTS."""
    config = read_config(ns.config) if getattr(ns, "config", None) else {}
    actions = {a.dest: a for a in parser._actions if a.dest not in ("help", "config")}
    unknown = sorted(set(config) - set(actions))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    for dest, action in actions.items():
        if getattr(ns, dest, None) is not None:
            continue
        if dest in config:
            raw = config[dest]
            try:
                value = action.type(raw) if action.type else raw
            except ValueError:
                raise UsageError(f"bad value for {dest}: {raw!r}") from None
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"{dest} must be one of {sorted(action.choices)}")
            setattr(ns, dest, value)
        elif dest in DEFAULTS:
            setattr(ns, dest, DEFAULTS[dest])
    return ns


def fingerprint(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path, command: str, ns: argparse.Namespace, inputs, outputs, extra=None):
    config = {k: v for k, v in sorted(vars(ns).items()) if k not in ("func", "command", "annotator_set")}
    manifest = {
        "command": command,
        "config": config,
        "seeds": {"seed": config.get("seed")},
        "inputs": {str(p): fingerprint(p) for p in inputs},
        "outputs": sorted(str(p) for p in outputs),
        "version": __version__,
    }
    if extra:
        manifest.update(extra)
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


def require_file(path, what: str):
    if path is None:
        raise UsageError(f"{what} is required")
    if not Path(path).is_file():
        raise UsageError(f"{what} not found: {path}")


def require_dir(path, what: str):
    if not Path(path).is_dir():
        raise UsageError(f"{what} not found: {path}")


def train_config(ns) -> TrainConfig:
    return TrainConfig(learning_rate=ns.lr, batch_size=ns.batch_size, patience=ns.patience,
                       max_epochs=ns.max_epochs, seed=ns.seed)


def model_kw(ns) -> dict:
    kw = {}
    for name in ("lstm_units", "dense_units", "embed_dim"):
        if getattr(ns, name, None) is not None:
            kw[name] = getattr(ns, name)
    return kw


def check_feature_set(mode: str, name: str | None) -> str:
    name = name or DEFAULT_FEATURE_SET[mode]
    valid = CW_FEATURE_SETS if mode == "cw" else CE_FEATURE_SETS
    if name not in valid:
        raise UsageError(f"feature set {name!r} is not valid for mode {mode}; choose from {sorted(valid)}")
    return name


def emit(text: str, output):
    if output:
        atomic_write_text(output, text)
    else:
        sys.stdout.write(text)


def load_named_entities(ns):
    if getattr(ns, "ne_list", None):
        require_file(ns.ne_list, "named-entity list")
        text = Path(ns.ne_list).read_text(encoding="utf-8")
        return frozenset(line.strip() for line in text.splitlines() if line.strip())
    return default_gazetteer()


def render_corpus(records, words_per_record, fmt: str) -> str:
    lines = []
    if fmt == "plain":
        for rec, words in zip(records, words_per_record):
            lines.append(" ".join(write_token(w, rec.script) for w in words))
        return "\n".join(lines) + "\n" if lines else ""
    blocks = []
    for rec, words in zip(records, words_per_record):
        rows = []
        for i, (tok, w) in enumerate(zip(rec.tokens, words)):
            gold = rec.gold[i] if rec.gold and rec.gold[i] else {}
            cols = [write_token(tok.with_marks(("",) * len(tok.bare)), rec.script), write_token(w, rec.script),
                    gold.get("segmentation") or "", gold.get("pos") or "", gold.get("gender_number") or ""]
            rows.append("\t".join(cols).rstrip("\t"))
        blocks.append("\n".join(rows))
    return "\n\n".join(blocks) + "\n" if blocks else ""


# --- commands -------------------------------------------------------------------

def cmd_train(ns) -> int:
    require_file(ns.corpus, "corpus")
    if ns.mode is None:
        raise UsageError("--mode is required")
    ns.feature_set = check_feature_set(ns.mode, ns.feature_set)
    records = load_corpus(ns.corpus, ns.format, ns.script)
    out = Path(ns.out)
    cfg = train_config(ns)
    if ns.mode == "cw":
        bundle = train_cw(records, ns.annotator, ns.feature_set, cfg, ns.val_fraction, model_kw(ns))
        outputs = [out / "cw.model", out / "priors.bin", out / "lexicon.bin"]
    else:
        bundle = train_ce(records, ns.annotator, ns.feature_set, cfg, ns.val_fraction,
                          load_named_entities(ns), model_kw(ns))
        outputs = [out / "ce.model", out / "sukun.txt"]
    bundle.save(out)
    atomic_write_text(out / HISTORY, format_history(bundle.history))
    outputs.append(out / HISTORY)
    hyper = {"train": cfg.to_json(), "model": bundle.model.config.to_json(),
             "best_epoch": bundle.model.meta.get("best_epoch")}
    write_manifest(out / MANIFEST, "train", ns, [ns.corpus], outputs, {"hyperparameters": hyper})
    print(f"trained {ns.mode} model ({ns.feature_set}), best epoch {bundle.model.meta.get('best_epoch')}, "
          f"{len(bundle.history)} epochs -> {out}", file=sys.stderr)
    return 0


def cmd_diacritize(ns) -> int:
    require_file(ns.input, "input")
    require_dir(ns.cw, "CW model directory")
    if ns.ce:
        require_dir(ns.ce, "CE model directory")
    records = load_corpus(ns.input, ns.format, ns.script)
    diac = Diacritizer.load(ns.cw, ns.ce, ns.post_correct == "on")
    text = render_corpus(records, diac.diacritize(records), ns.format)
    emit(text, ns.output)
    if ns.output:
        write_manifest(str(ns.output) + ".manifest.json", "diacritize", ns,
                       [ns.input] + model_files(ns), [ns.output])
    return 0


def model_files(ns) -> list[Path]:
    files = []
    if getattr(ns, "cw", None):
        files += [Path(ns.cw) / n for n in ("cw.model", "priors.bin", "lexicon.bin")]
    if getattr(ns, "ce", None):
        files.append(Path(ns.ce) / "ce.model")
    return files


def _reference(ns):
    require_file(ns.ref, "reference")
    return load_corpus(ns.ref, ns.format, ns.script)


def _hypothesis(ns, ref_records):
    """Hypothesis token lists: from --hyp, or produced by the models on the reference text."""
    if ns.hyp:
        require_file(ns.hyp, "hypothesis")
        return [list(r.tokens) for r in load_corpus(ns.hyp, ns.format, ns.script)]
    if not ns.cw and not ns.ce:
        raise UsageError("give --hyp or a model directory (--cw/--ce)")
    if ns.cw:
        require_dir(ns.cw, "CW model directory")
    if ns.ce:
        require_dir(ns.ce, "CE model directory")
    if ns.cw:
        return Diacritizer.load(ns.cw, ns.ce, ns.post_correct == "on").diacritize(ref_records)
    ce = CeBundle.load(ns.ce)
    slots = attach_ce_slots(ref_records, ce.annotator)
    labels = predict_ce(ce, ref_records)
    return [[compose_word(w, lab) for w, lab in zip(ws, labs)] for ws, labs in zip(slots, labels)]


def _slot_annotator(ns) -> str:
    if ns.annotator_set:
        return ns.annotator
    for d, cls in ((getattr(ns, "cw", None), CwBundle), (getattr(ns, "ce", None), CeBundle)):
        if d:
            return cls.load(d).annotator
    return ns.annotator


def cmd_evaluate(ns) -> int:
    if ns.ablation_sweep:
        return ablation_sweep(ns)
    ref_records = _reference(ns)
    hyp = _hypothesis(ns, ref_records)
    ref = attach_ce_slots(ref_records, _slot_annotator(ns))
    rep = score(ref, hyp, ns.mode)
    text = rep.render_text()
    conf = None
    if ns.mode in ("ce", "full"):
        conf = confusion(ref, hyp)
        text += "\n" + conf.render_text()
    sys.stdout.write(text)
    if ns.out:
        out = Path(ns.out)
        out.mkdir(parents=True, exist_ok=True)
        outputs = [out / "score.txt", out / "score.tsv"]
        atomic_write_text(out / "score.txt", rep.render_text())
        atomic_write_text(out / "score.tsv", rep.render_tsv())
        if conf is not None:
            atomic_write_text(out / "confusion.txt", conf.render_text())
            atomic_write_text(out / "confusion.tsv", conf.render_tsv())
            outputs += [out / "confusion.txt", out / "confusion.tsv"]
        inputs = [ns.ref] + ([ns.hyp] if ns.hyp else model_files(ns))
        write_manifest(out / MANIFEST, "evaluate", ns, inputs, outputs)
    return 0


def ablation_sweep(ns) -> int:
    """Train one model per feature set on --train and score each on --ref."""
    require_file(ns.train, "training corpus (--train)")
    ref_records = _reference(ns)
    mode = "cw" if ns.mode == "cw" else "ce"
    train_records = load_corpus(ns.train, ns.format, ns.script)
    ref = attach_ce_slots(ref_records, ns.annotator)
    cfg = train_config(ns)
    rows = []
    sets = CW_FEATURE_SETS if mode == "cw" else CE_FEATURE_SETS
    for name in sets:
        if mode == "cw":
            bundle = train_cw(train_records, ns.annotator, name, cfg, ns.val_fraction, model_kw(ns))
            hyp = predict_cw(bundle, ref_records, CorrectionPolicy(enabled=ns.post_correct == "on"))
            rep = score(ref, hyp, "cw")
            rows.append(f"{name}\t{100 * rep.wer:.2f}\t{100 * rep.der:.2f}")
        else:
            bundle = train_ce(train_records, ns.annotator, name, cfg, ns.val_fraction,
                              load_named_entities(ns), model_kw(ns))
            labels = predict_ce(bundle, ref_records)
            hyp = [[compose_word(w, lab) for w, lab in zip(ws, labs)] for ws, labs in zip(ref, labels)]
            rep = score(ref, hyp, "ce")
            rows.append(f"{SETUP_NAMES.get(name, name)}\t{100 * rep.ceer:.2f}")
    header = "Setup\tWER\tDER" if mode == "cw" else "Setup\tCEER"
    text = "\n".join([header] + rows) + "\n"
    sys.stdout.write(text)
    if ns.out:
        out = Path(ns.out)
        out.mkdir(parents=True, exist_ok=True)
        atomic_write_text(out / "ablation.tsv", text)
        write_manifest(out / MANIFEST, "evaluate --ablation-sweep", ns, [ns.train, ns.ref], [out / "ablation.tsv"],
                       {"hyperparameters": {"train": cfg.to_json(), "model": model_kw(ns)}})
    return 0


def cmd_report(ns) -> int:
    ref_records = _reference(ns)
    hyp = _hypothesis(ns, ref_records)
    ref = attach_ce_slots(ref_records, _slot_annotator(ns))
    conf = confusion(ref, hyp)
    sys.stdout.write(conf.render_text(ns.min_share))
    if ns.out:
        out = Path(ns.out)
        out.mkdir(parents=True, exist_ok=True)
        atomic_write_text(out / "confusion.txt", conf.render_text(ns.min_share))
        atomic_write_text(out / "confusion.tsv", conf.render_tsv())
        inputs = [ns.ref] + ([ns.hyp] if ns.hyp else model_files(ns))
        write_manifest(out / MANIFEST, "report", ns, inputs, [out / "confusion.txt", out / "confusion.tsv"])
    return 0


def cmd_dump_features(ns) -> int:
    require_file(ns.corpus, "corpus")
    if ns.mode is None:
        raise UsageError("--mode is required")
    records = load_corpus(ns.corpus, ns.format, ns.script)
    annot = make_annotator(ns.annotator)
    parts = []
    if ns.mode == "cw":
        priors = CwBundle.load(ns.cw).priors if ns.cw else build_prior_table(records, annot)
        for rec in records:
            for ex in encode_cw(rec, priors, annot):
                parts.append(dump_rows(ex))
    else:
        ne = load_named_entities(ns)
        from .ce_features import CE_FIELDS, build_sukun_list
        sukun = build_sukun_list(records, annot)
        lines = ["\t".join(CE_FIELDS + ("label",))]
        for rec in records:
            rows, labels = sentence_rows(rec, rec.annotate(annot), sukun, ne)
            for row, lab in zip(rows, labels):
                lines.append("\t".join(str(int(v)) if isinstance(v, bool) else (v or "_") for v in row)
                             + "\t" + (lab or VIRTUAL))
            lines.append("")
        parts.append("\n".join(lines) + "\n")
    emit("\n".join(parts), ns.output)
    return 0


def cmd_dump_codec(ns) -> int:
    emit(table_tsv(), ns.output)
    return 0


# --- parser ---------------------------------------------------------------------

def _common(p, corpus=True):
    p.add_argument("--config", help="key = value file; command-line flags override it")
    p.add_argument("--format", choices=("plain", "tsv"))
    p.add_argument("--script", choices=("auto", "arabic", "buckwalter"))
    p.add_argument("--annotator", choices=sorted(ANNOTATORS))


def _training(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--feature-set", help="cw: char, char+seg, char+prior, all; ce: " + ", ".join(CE_FEATURE_SETS))
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--max-epochs", type=int)
    p.add_argument("--val-fraction", type=float)
    p.add_argument("--lstm-units", type=int)
    p.add_argument("--dense-units", type=int)
    p.add_argument("--embed-dim", type=int)
    p.add_argument("--ne-list", help="named-entity gazetteer, one bare Buckwalter word per line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tashkeel", description=__doc__.splitlines()[0],
                                     epilog=f"Resource files may be overridden from the ${ENV_VAR} directory.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the CW or CE model")
    p.add_argument("--mode", choices=("cw", "ce"))
    p.add_argument("--corpus")
    p.add_argument("--out", default="model")
    _common(p)
    _training(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("diacritize", help="add diacritics to a corpus")
    p.add_argument("--input")
    p.add_argument("--cw", required=True, help="CW model directory")
    p.add_argument("--ce", help="CE model directory")
    p.add_argument("--post-correct", choices=("on", "off"))
    p.add_argument("--output", help="output file (default stdout)")
    _common(p)
    p.set_defaults(func=cmd_diacritize)

    for name, func, helptext in (("evaluate", cmd_evaluate, "score a hypothesis or a model against a reference"),
                                 ("report", cmd_report, "case-ending confusion and distribution report")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--ref")
        p.add_argument("--hyp")
        p.add_argument("--cw", help="CW model directory")
        p.add_argument("--ce", help="CE model directory")
        p.add_argument("--post-correct", choices=("on", "off"))
        p.add_argument("--out", help="report directory")
        _common(p)
        if name == "evaluate":
            p.add_argument("--mode", choices=("cw", "ce", "full"))
            p.add_argument("--ablation-sweep", action="store_true", default=None,
                           help="train one model per feature set on --train and score each")
            p.add_argument("--train", help="training corpus for --ablation-sweep")
            _training(p)
        else:
            p.add_argument("--min-share", type=float, help="hide error pairs below this share of errors")
        p.set_defaults(func=func)

    p = sub.add_parser("dump-features", help="print feature rows for a corpus")
    p.add_argument("--mode", choices=("cw", "ce"))
    p.add_argument("--corpus")
    p.add_argument("--cw", help="take priors from this CW model directory")
    p.add_argument("--ne-list")
    p.add_argument("--output")
    _common(p)
    p.set_defaults(func=cmd_dump_features)

    p = sub.add_parser("dump-codec", help="print the Buckwalter table")
    p.add_argument("--output")
    p.set_defaults(func=cmd_dump_codec)
    return parser


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    sub = _subparser(parser, ns.command)
    try:
        ns.annotator_set = getattr(ns, "annotator", None) is not None
        resolve(sub, ns)
        if ns.command == "evaluate" and ns.mode is None:
            ns.mode = "full"
        return ns.func(ns)
    except UsageError as exc:
        sub.print_usage(sys.stderr)
        print(f"tashkeel {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    except (TashkeelError, OSError, ValueError) as exc:
        print(f"tashkeel {ns.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
