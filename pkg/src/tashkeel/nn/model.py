"""Embedding bank + biLSTM + dense + softmax sequence labeller.

Shapes: a batch is ``ids`` (B, T, F) of per-feature vocabulary ids,
``lengths`` (B,) and optionally ``labels`` (B, T) with -1 wherever no loss
is taken (padding, word boundaries).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .. import container
from ..errors import ContainerError, ShapeMismatch
from . import kernels

IGNORE = -1
INIT_SCALE = 0.05
FORGET_BIAS = 1.0


@dataclass(frozen=True)
class ModelConfig:
    mode: str
    vocab_sizes: tuple[int, ...]
    label_count: int
    embed_dim: int
    lstm_units: int = 100
    dense_units: int = 100
    input_dropout: float = 0.0
    dense_dropout: float = 0.0

    def __post_init__(self):
        if self.mode not in ("CW", "CE"):
            raise ValueError(f"mode must be CW or CE, got {self.mode!r}")
        if min(self.embed_dim, self.lstm_units, self.dense_units, self.label_count, len(self.vocab_sizes)) <= 0:
            raise ValueError("model dimensions must be positive")
        if not (0 <= self.input_dropout < 1 and 0 <= self.dense_dropout < 1):
            raise ValueError("dropout rates must lie in [0, 1)")
        if self.mode == "CE" and self.label_count != 15:
            raise ValueError("the case-ending model predicts exactly 15 labels")

    @classmethod
    def cw(cls, vocab_sizes, label_count: int = 15, **kw) -> "ModelConfig":
        kw.setdefault("embed_dim", 50)
        return cls("CW", tuple(vocab_sizes), label_count, **kw)

    @classmethod
    def ce(cls, vocab_sizes, **kw) -> "ModelConfig":
        kw.setdefault("embed_dim", 100)
        kw.setdefault("input_dropout", 0.75)
        kw.setdefault("dense_dropout", 0.15)
        return cls("CE", tuple(vocab_sizes), 15, **kw)

    @property
    def feature_count(self) -> int:
        return len(self.vocab_sizes)

    @property
    def input_dim(self) -> int:
        return self.feature_count * self.embed_dim

    def to_json(self) -> dict:
        d = asdict(self)
        d["vocab_sizes"] = list(self.vocab_sizes)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ModelConfig":
        return cls(**{**d, "vocab_sizes": tuple(d["vocab_sizes"])})


def param_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    H, D = cfg.lstm_units, cfg.input_dim
    shapes = {f"emb.{i}": (n, cfg.embed_dim) for i, n in enumerate(cfg.vocab_sizes)}
    for d in ("fw", "bw"):
        shapes[f"{d}.Wx"] = (D, 4 * H)
        shapes[f"{d}.Wh"] = (H, 4 * H)
        shapes[f"{d}.b"] = (4 * H,)
    shapes["dense.W"] = (2 * H, cfg.dense_units)
    shapes["dense.b"] = (cfg.dense_units,)
    shapes["out.W"] = (cfg.dense_units, cfg.label_count)
    shapes["out.b"] = (cfg.label_count,)
    return shapes


def pad_batch(seqs):
    """Stack (ids (T_i, F), labels (T_i,)) pairs into padded arrays; PAD id is 0."""
    lengths = np.array([len(ids) for ids, _ in seqs], dtype=np.int64)
    T = int(lengths.max()) if len(seqs) else 0
    F = seqs[0][0].shape[1] if seqs else 0
    ids = np.zeros((len(seqs), T, F), dtype=np.int32)
    labels = np.full((len(seqs), T), IGNORE, dtype=np.int32)
    for b, (x, y) in enumerate(seqs):
        ids[b, : len(x)] = x
        if y is not None:
            labels[b, : len(y)] = y
    return ids, lengths, labels


def _reverse_index(lengths, T):
    t = np.arange(T)[None, :]
    L = np.asarray(lengths)[:, None]
    return np.where(t < L, L - 1 - t, t)


def _reverse(x, rev):
    return np.take_along_axis(x, rev.reshape(rev.shape + (1,) * (x.ndim - 2)), axis=1)


def _softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _dropout_mask(rng, shape, rate, dtype):
    keep = rng.random(shape, dtype=np.float64) >= rate
    return (keep / (1.0 - rate)).astype(dtype)


@dataclass
class SequenceModel:
    config: ModelConfig
    params: dict[str, np.ndarray]
    # encoder vocabularies, feature-set name, seeds, corpus fingerprints
    meta: dict = field(default_factory=dict)

    @classmethod
    def init(cls, config: ModelConfig, seed: int = 0, dtype=np.float32) -> "SequenceModel":
        rng = np.random.default_rng(seed)
        params = {}
        for name, shape in param_shapes(config).items():
            if name.endswith(".b"):
                p = np.zeros(shape, dtype=dtype)
                if name in ("fw.b", "bw.b"):
                    H = config.lstm_units
                    p[H: 2 * H] = FORGET_BIAS
            else:
                p = rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape).astype(dtype)
            params[name] = p
        return cls(config, params, {"init_seed": seed})

    @classmethod
    def zeros(cls, config: ModelConfig, dtype=np.float32) -> "SequenceModel":
        return cls(config, {n: np.zeros(s, dtype=dtype) for n, s in param_shapes(config).items()})

    @property
    def dtype(self):
        return self.params["out.W"].dtype

    def astype(self, dtype) -> "SequenceModel":
        return SequenceModel(self.config, {k: v.astype(dtype) for k, v in self.params.items()}, dict(self.meta))

    def copy(self) -> "SequenceModel":
        return self.astype(self.dtype)

    def n_params(self) -> int:
        return sum(p.size for p in self.params.values())

    # -- forward / backward ------------------------------------------------

    def _check(self, ids, lengths):
        if ids.ndim != 3 or ids.shape[2] != self.config.feature_count:
            raise ShapeMismatch(f"expected ids of shape (B, T, {self.config.feature_count}), got {ids.shape}")
        if len(lengths) != ids.shape[0] or (len(lengths) and lengths.max() > ids.shape[1]):
            raise ShapeMismatch("lengths do not match the id array")
        for f, n in enumerate(self.config.vocab_sizes):
            col = ids[:, :, f]
            if col.size and (col.min() < 0 or col.max() >= n):
                raise ShapeMismatch(f"feature {f} id out of range [0, {n})")

    def _forward(self, ids, lengths, train_mode=False, rng=None):
        cfg, P = self.config, self.params
        ids = np.asarray(ids)
        lengths = np.asarray(lengths)
        self._check(ids, lengths)
        B, T, _ = ids.shape
        dtype = self.dtype
        H = cfg.lstm_units
        cache = {"ids": ids, "lengths": lengths}

        X = np.concatenate([P[f"emb.{f}"][ids[:, :, f]] for f in range(cfg.feature_count)], axis=-1)
        if train_mode and cfg.input_dropout > 0:
            m_in = _dropout_mask(rng, X.shape, cfg.input_dropout, dtype)
            X = X * m_in
            cache["m_in"] = m_in
        cache["X"] = X
        rev = _reverse_index(lengths, T)
        cache["rev"] = rev

        X2 = X.reshape(B * T, -1)
        xf = (X2 @ P["fw.Wx"] + P["fw.b"]).reshape(B, T, 4 * H)
        xb = _reverse((X2 @ P["bw.Wx"] + P["bw.b"]).reshape(B, T, 4 * H), rev)
        Hf, Cf, Gf = kernels.lstm_forward(np.ascontiguousarray(xf.transpose(1, 0, 2)), P["fw.Wh"])
        Hb, Cb, Gb = kernels.lstm_forward(np.ascontiguousarray(xb.transpose(1, 0, 2)), P["bw.Wh"])
        cache["fw"] = (Gf, Cf, Hf)
        cache["bw"] = (Gb, Cb, Hb)
        hcat = np.concatenate([Hf.transpose(1, 0, 2), _reverse(Hb.transpose(1, 0, 2), rev)], axis=-1)
        if train_mode and cfg.dense_dropout > 0:
            m_d = _dropout_mask(rng, hcat.shape, cfg.dense_dropout, dtype)
            hcat = hcat * m_d
            cache["m_d"] = m_d
        cache["hcat"] = hcat
        D = np.tanh(hcat @ P["dense.W"] + P["dense.b"])
        cache["D"] = D
        probs = _softmax(D @ P["out.W"] + P["out.b"])
        cache["probs"] = probs
        return probs, cache

    def forward(self, ids, lengths, train_mode: bool = False, rng=None) -> np.ndarray:
        """Per-position label distributions, shape (B, T, label_count)."""
        if train_mode and rng is None:
            raise ValueError("train_mode needs an rng for dropout")
        return self._forward(ids, lengths, train_mode, rng)[0]

    def loss_and_gradients(self, ids, lengths, labels, train_mode: bool = False, rng=None):
        """Mean cross-entropy over positions whose label is not -1, and its gradient."""
        labels = np.asarray(labels)
        if labels.shape != np.asarray(ids).shape[:2]:
            raise ShapeMismatch(f"labels shape {labels.shape} does not match ids {np.asarray(ids).shape[:2]}")
        if train_mode and rng is None:
            raise ValueError("train_mode needs an rng for dropout")
        probs, cache = self._forward(ids, lengths, train_mode, rng)
        return self._backward(cache, probs, labels)

    def _backward(self, cache, probs, labels):
        cfg, P = self.config, self.params
        dtype = self.dtype
        B, T, L = probs.shape
        H = cfg.lstm_units
        valid = labels != IGNORE
        n = int(valid.sum())
        grads = {k: np.zeros_like(v) for k, v in P.items()}
        if n == 0:
            return 0.0, grads
        if labels[valid].max() >= L or labels[valid].min() < 0:
            raise ShapeMismatch("label id out of range")
        bi, ti = np.nonzero(valid)
        yi = labels[valid]
        p_true = probs[bi, ti, yi].astype(np.float64)
        loss = float(-np.log(np.maximum(p_true, np.finfo(dtype).tiny)).mean())

        dlogits = np.zeros_like(probs)
        dlogits[bi, ti] = probs[bi, ti]
        dlogits[bi, ti, yi] -= 1
        dlogits /= n

        D = cache["D"]
        grads["out.W"] = D.reshape(-1, D.shape[-1]).T @ dlogits.reshape(-1, L)
        grads["out.b"] = dlogits.sum(axis=(0, 1))
        dpre = (dlogits @ P["out.W"].T) * (1 - D * D)
        hcat = cache["hcat"]
        grads["dense.W"] = hcat.reshape(-1, hcat.shape[-1]).T @ dpre.reshape(-1, dpre.shape[-1])
        grads["dense.b"] = dpre.sum(axis=(0, 1))
        dh = dpre @ P["dense.W"].T
        if "m_d" in cache:
            dh = dh * cache["m_d"]

        rev = cache["rev"]
        dHf = np.ascontiguousarray(dh[:, :, :H].transpose(1, 0, 2))
        dHb = np.ascontiguousarray(_reverse(dh[:, :, H:], rev).transpose(1, 0, 2))
        dxf, grads["fw.Wh"] = kernels.lstm_backward(dHf, P["fw.Wh"], *cache["fw"])
        dxb, grads["bw.Wh"] = kernels.lstm_backward(dHb, P["bw.Wh"], *cache["bw"])
        dxf = dxf.transpose(1, 0, 2)
        dxb = _reverse(dxb.transpose(1, 0, 2), rev)

        X = cache["X"]
        X2 = X.reshape(B * T, -1)
        dX = np.zeros_like(X)
        for d, dz in (("fw", dxf), ("bw", dxb)):
            dz2 = dz.reshape(B * T, -1)
            grads[f"{d}.Wx"] = X2.T @ dz2
            grads[f"{d}.b"] = dz2.sum(axis=0)
            dX += (dz2 @ P[f"{d}.Wx"].T).reshape(X.shape)
        if "m_in" in cache:
            dX *= cache["m_in"]
        ids = cache["ids"]
        E = cfg.embed_dim
        for f in range(cfg.feature_count):
            np.add.at(grads[f"emb.{f}"], ids[:, :, f].reshape(-1), dX[:, :, f * E:(f + 1) * E].reshape(-1, E))
        return loss, grads

    def predict(self, ids, lengths) -> list[np.ndarray]:
        """Argmax label per real position (ties go to the lowest id); padding is dropped."""
        probs = self.forward(ids, lengths)
        best = probs.argmax(axis=-1)
        return [best[b, : int(n)] for b, n in enumerate(np.asarray(lengths))]

    # -- persistence ---------------------------------------------------------

    def to_bytes(self) -> bytes:
        meta = {"config": self.config.to_json(), "meta": self.meta}
        arrays = {k: self.params[k].astype("<f4") for k in sorted(self.params)}
        return container.dumps("model", meta, arrays)

    def save(self, path):
        container.atomic_write_bytes(path, self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "SequenceModel":
        meta, arrays = container.loads(data, "model")
        cfg = ModelConfig.from_json(meta["config"])
        expected = param_shapes(cfg)
        if set(arrays) != set(expected) or any(arrays[k].shape != expected[k] for k in expected):
            raise ContainerError("model parameters do not match the stored configuration")
        return cls(cfg, {k: arrays[k].astype(np.float32) for k in expected}, meta["meta"])

    @classmethod
    def load(cls, path) -> "SequenceModel":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def forward(model: SequenceModel, batch, train_mode: bool = False, rng=None):
    ids, lengths = batch[0], batch[1]
    return model.forward(ids, lengths, train_mode, rng)


def loss_and_gradients(model: SequenceModel, batch, labels, train_mode: bool = False, rng=None):
    ids, lengths = batch[0], batch[1]
    return model.loss_and_gradients(ids, lengths, labels, train_mode, rng)


def predict(model: SequenceModel, batch):
    return model.predict(batch[0], batch[1])
