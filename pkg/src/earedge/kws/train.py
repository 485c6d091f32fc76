"""Mini-batch SGD training for :class:`KwsModel`."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from earedge.errors import ConfigError
from earedge.kws.model import LABELS, KwsModel

log = logging.getLogger(__name__)


@dataclass
class EpochMetrics:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


@dataclass
class TrainResult:
    model: KwsModel
    history: list[EpochMetrics] = field(default_factory=list)
    train_idx: np.ndarray | None = None
    val_idx: np.ndarray | None = None

    @property
    def final_val_acc(self) -> float:
        return self.history[-1].val_acc if self.history else float("nan")


def encode_labels(labels, vocab=LABELS) -> np.ndarray:
    index = {name: i for i, name in enumerate(vocab)}
    try:
        return np.array([index[l] if isinstance(l, str) else int(l) for l in labels], dtype=np.int64)
    except KeyError as exc:
        raise ConfigError(f"unknown label {exc.args[0]!r}") from None


def stratified_split(y: np.ndarray, split: float, rng: np.random.Generator):
    """Per-class shuffled split; every class keeps at least one example on each side."""
    train, val = [], []
    for c in np.unique(y):
        idx = rng.permutation(np.flatnonzero(y == c))
        n_train = min(len(idx) - 1, max(1, int(round(split * len(idx)))))
        train.append(idx[:n_train])
        val.append(idx[n_train:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(val))


def evaluate(model: KwsModel, x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    if len(y) == 0:
        return float("nan"), float("nan")
    probs = model.predict_proba(x)
    loss = float(-np.mean(np.log(probs[np.arange(len(y)), y] + 1e-300)))
    acc = float(np.mean(probs.argmax(axis=1) == y))
    return loss, acc


def train(features, labels, epochs: int = 100, lr: float = 0.005, batch: int = 32,
          split: float = 0.8, seed: int = 0, init: KwsModel | None = None) -> TrainResult:
    """Train from scratch (or from ``init``) with plain SGD.

    ``features`` is ``(N, 49, 13)``; ``labels`` are names or indices. The
    split, initialisation, shuffling and dropout masks all derive from
    ``seed``.
    """
    x = np.asarray(features, dtype=np.float64)
    y = encode_labels(labels)
    counts = np.bincount(y, minlength=len(LABELS))
    if np.any(counts < 2):
        missing = [LABELS[i] for i in np.flatnonzero(counts < 2)]
        raise ConfigError(f"need at least two examples per class; short: {missing}")
    if not 0.0 < split < 1.0:
        raise ConfigError("split must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    train_idx, val_idx = stratified_split(y, split, rng)
    xt, yt = x[train_idx], y[train_idx]
    if init is not None:
        model = init.copy()
    else:
        model = KwsModel.init(seed)
        model.norm_mean = xt.mean(axis=(0, 1))
        model.norm_std = np.maximum(xt.std(axis=(0, 1)), 1e-6)
    history = []
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(train_idx))
        total, seen = 0.0, 0
        for start in range(0, len(order), batch):
            sel = order[start:start + batch]
            loss, grads = model.loss_and_grad(xt[sel], yt[sel], train=True, rng=rng)
            for name, g in grads.items():
                model.params[name] -= lr * g
            total += loss * len(sel)
            seen += len(sel)
        _, train_acc = evaluate(model, xt, yt)
        val_loss, val_acc = evaluate(model, x[val_idx], y[val_idx])
        history.append(EpochMetrics(epoch, total / seen, train_acc, val_loss, val_acc))
        log.debug("epoch %d loss %.4f val_acc %.3f", epoch, total / seen, val_acc)
    return TrainResult(model, history, train_idx, val_idx)
