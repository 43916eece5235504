"""Mini-batch training with Adam, plus evaluation and confusion matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyDataset
from .model import Model

__all__ = ["TrainConfig", "Adam", "ConfusionMatrix", "train", "evaluate"]


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    epochs: int = 60
    seed: int = 0
    # stop once training accuracy holds at 1.0 this many epochs in a row
    early_stop_patience: int = 3

    def __post_init__(self):
        if self.lr <= 0 or self.epochs < 1:
            raise ValueError("lr must be > 0 and epochs >= 1")


class Adam:
    """Adam with bias correction; updates parameter arrays in place."""

    def __init__(self, cfg: TrainConfig):
        self.cfg = cfg
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, parameters):
        """parameters: iterable of (key, param array, grad array)."""
        c = self.cfg
        self.t += 1
        bc1 = 1.0 - c.beta1**self.t
        bc2 = 1.0 - c.beta2**self.t
        for key, p, g in parameters:
            m = self.m.setdefault(key, np.zeros_like(p))
            v = self.v.setdefault(key, np.zeros_like(p))
            m += (1.0 - c.beta1) * (g - m)
            v += (1.0 - c.beta2) * (g * g - v)
            p -= c.lr * (m / bc1) / (np.sqrt(v / bc2) + c.eps)


@dataclass
class ConfusionMatrix:
    """Rows are truth, columns are predictions."""

    counts: np.ndarray

    @classmethod
    def from_predictions(cls, truth, pred, n_classes: int) -> "ConfusionMatrix":
        counts = np.zeros((n_classes, n_classes), dtype=np.int64)
        np.add.at(counts, (np.asarray(truth), np.asarray(pred)), 1)
        return cls(counts)

    @property
    def accuracy(self) -> float:
        total = self.counts.sum()
        return float(np.trace(self.counts)) / total if total else 0.0


def train(model: Model, x: np.ndarray, y: np.ndarray,
          cfg: TrainConfig = TrainConfig(), verbose: bool = False):
    """Seeded mini-batch training; returns a per-epoch loss/accuracy history.

    x is [N, input_len, 1], y is integer class labels.
    """
    n = x.shape[0]
    if n == 0:
        raise EmptyDataset("no training samples")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    opt = Adam(cfg)
    history = []
    perfect_streak = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        losses = []
        hits = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb, yb = x[idx], y[idx]
            loss = model.loss_and_grads(xb, yb)
            logits = model.forward(xb, training=False)
            hits += int(np.sum(logits.argmax(axis=1) == yb))
            opt.step(model.parameters())
            losses.append(loss)
        acc = hits / n
        history.append({"epoch": epoch, "loss": float(np.mean(losses)), "accuracy": acc})
        if verbose:
            print(f"epoch {epoch:3d}  loss {history[-1]['loss']:.4f}  acc {acc:.4f}")
        perfect_streak = perfect_streak + 1 if acc >= 1.0 else 0
        if perfect_streak >= cfg.early_stop_patience:
            break
    return history


def evaluate(model: Model, x: np.ndarray, y: np.ndarray,
             batch_size: int = 64):
    """(accuracy, ConfusionMatrix) on argmax predictions, dropout disabled."""
    if x.shape[0] == 0:
        raise EmptyDataset("no evaluation samples")
    preds = []
    for start in range(0, x.shape[0], batch_size):
        logits = model.forward(x[start : start + batch_size], training=False)
        preds.append(logits.argmax(axis=1))
    pred = np.concatenate(preds)
    cm = ConfusionMatrix.from_predictions(y, pred, model.config.n_classes)
    return cm.accuracy, cm
