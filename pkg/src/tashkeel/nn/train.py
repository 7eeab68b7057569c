"""Mini-batch training with Adamax and validation-loss early stopping."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import EmptyDataset
from .model import IGNORE, SequenceModel, pad_batch
from .optim import AdamaxState, adamax_step

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    batch_size: int = 256
    patience: int = 5
    max_epochs: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.patience < 1 or self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("patience, batch_size and max_epochs must be >= 1")

    def to_json(self) -> dict:
        return asdict(self) | {"optimizer": "adamax"}


class EarlyStopping:
    """Tracks the best validation loss; ``stop`` after ``patience`` epochs without improvement."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = float("inf")
        self.best_epoch = 0
        self.wait = 0

    def update(self, epoch: int, value: float) -> bool:
        """Record one epoch; True when it is the new best."""
        if value < self.best:
            self.best, self.best_epoch, self.wait = value, epoch, 0
            return True
        self.wait += 1
        return False

    @property
    def stop(self) -> bool:
        return self.wait >= self.patience


def make_batches(data, batch_size: int) -> list[list[int]]:
    """Length-bucketed batches of example indices (deterministic)."""
    order = np.argsort([len(x) for x, _ in data], kind="stable")
    return [order[i: i + batch_size].tolist() for i in range(0, len(order), batch_size)]


def dataset_loss(model: SequenceModel, data, batch_size: int = 256) -> float:
    """Mean cross-entropy over all labelled positions, eval mode."""
    total, count = 0.0, 0
    for idx in make_batches(data, batch_size):
        ids, lengths, labels = pad_batch([data[i] for i in idx])
        n = int((labels != IGNORE).sum())
        if n:
            loss, _ = model.loss_and_gradients(ids, lengths, labels)
            total += loss * n
            count += n
    return total / count if count else 0.0


def predict_all(model: SequenceModel, data, batch_size: int = 256) -> list[np.ndarray]:
    """Argmax labels for every example, in input order."""
    out: list[np.ndarray | None] = [None] * len(data)
    for idx in make_batches(data, batch_size):
        ids, lengths, _ = pad_batch([(data[i][0], None) for i in idx])
        for i, pred in zip(idx, model.predict(ids, lengths)):
            out[i] = pred
    return out


def accuracy(model: SequenceModel, data, batch_size: int = 256) -> float:
    correct = total = 0
    for (_, labels), pred in zip(data, predict_all(model, data, batch_size)):
        mask = labels != IGNORE
        correct += int((pred[mask] == labels[mask]).sum())
        total += int(mask.sum())
    return correct / total if total else 1.0


def train(model: SequenceModel, train_set, val_set, cfg: TrainConfig = TrainConfig(),
          val_loss_fn=None, on_epoch=None):
    """Train ``model`` in place and return (best snapshot, history).

    ``train_set``/``val_set`` are lists of (ids (T, F), labels (T,)).
    ``val_loss_fn(model, epoch)`` replaces the validation loss computation.
    """
    if not train_set:
        raise EmptyDataset("no training examples")
    if not val_set and val_loss_fn is None:
        raise EmptyDataset("early stopping needs a non-empty validation set")
    shuffle_seq, dropout_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    dropout_rng = np.random.default_rng(dropout_seq)
    state = AdamaxState()
    stopper = EarlyStopping(cfg.patience)
    batches = make_batches(train_set, cfg.batch_size)
    best = {k: v.copy() for k, v in model.params.items()}
    history = []
    for epoch in range(1, cfg.max_epochs + 1):
        total, count = 0.0, 0
        for bi in shuffle_rng.permutation(len(batches)):
            ids, lengths, labels = pad_batch([train_set[i] for i in batches[bi]])
            n = int((labels != IGNORE).sum())
            if not n:
                continue
            loss, grads = model.loss_and_gradients(ids, lengths, labels, train_mode=True, rng=dropout_rng)
            adamax_step(model.params, grads, state, cfg.learning_rate)
            total += loss * n
            count += n
        train_loss = total / count if count else 0.0
        val_loss = val_loss_fn(model, epoch) if val_loss_fn else dataset_loss(model, val_set, cfg.batch_size)
        improved = stopper.update(epoch, val_loss)
        if improved:
            best = {k: v.copy() for k, v in model.params.items()}
        history.append({"epoch": epoch, "train_loss": train_loss, "val_loss": val_loss, "best": improved})
        log.info("epoch %d train_loss %.6f val_loss %.6f", epoch, train_loss, val_loss)
        if on_epoch:
            on_epoch(history[-1])
        if stopper.stop:
            break
    model.params = best
    model.meta["best_epoch"] = stopper.best_epoch
    model.meta["train"] = cfg.to_json()
    return model, history


def format_history(history) -> str:
    lines = ["epoch\ttrain_loss\tval_loss\tbest"]
    for h in history:
        lines.append(f"{h['epoch']}\t{h['train_loss']:.6f}\t{h['val_loss']:.6f}\t{int(h['best'])}")
    return "\n".join(lines) + "\n"
