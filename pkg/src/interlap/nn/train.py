"""Full-batch gradient descent training for node classification."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import NonFiniteValue, ShapeMismatch
from . import autodiff as ad
from .models import Model, ModelConfig


@dataclass(frozen=True)
class TrainReport:
    test_accuracy: float
    train_accuracy: float
    final_loss: float
    initial_loss: float
    epochs_run: int
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def accuracy(logits: np.ndarray, labels, idx) -> float:
    idx = np.asarray(idx)
    if idx.size == 0:
        return float("nan")
    return float(np.mean(np.argmax(logits[idx], axis=1) == np.asarray(labels)[idx]))


class _Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p.value) for p in params]
        self.v = [np.zeros_like(p.value) for p in params]
        self.step_count = 0

    def step(self, params, grads):
        self.step_count += 1
        c1 = 1.0 - self.b1**self.step_count
        c2 = 1.0 - self.b2**self.step_count
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p.value -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train(model: Model, features, labels, split, cfg: ModelConfig | None = None) -> TrainReport:
    """Train ``model`` in place with full-batch, weight-decayed updates.

    The loss is the mean cross-entropy over ``split.train_idx``; accuracy is
    reported on both index sets after the final update.
    """
    cfg = cfg or model.cfg
    X = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != len(labels):
        raise ShapeMismatch(f"features {X.shape} vs {len(labels)} labels")
    if X.shape[1] != model.dims[0]:
        raise ShapeMismatch(f"model expects {model.dims[0]} input columns, got {X.shape[1]}")
    x = ad.constant(X)
    params = model.parameters()
    train_idx = np.asarray(split.train_idx)

    adam = _Adam(params, cfg.lr) if cfg.optimizer == "adam" else None
    initial_loss = None
    for _ in range(cfg.epochs):
        for p in params:
            p.zero_grad()
        loss = ad.softmax_cross_entropy(model(x), labels, train_idx)
        loss_value = float(loss.value[0, 0])
        if not np.isfinite(loss_value):
            raise NonFiniteValue("training loss diverged")
        if initial_loss is None:
            initial_loss = loss_value
        ad.backward(loss)
        grads = [
            (p.grad if p.grad is not None else 0.0) + cfg.weight_decay * p.value for p in params
        ]
        if adam is not None:
            adam.step(params, grads)
        else:
            for p, g in zip(params, grads):
                p.value -= cfg.lr * g

    logits = model(x).value
    final_loss = float(ad.softmax_cross_entropy(ad.constant(logits), labels, train_idx).value[0, 0])
    if initial_loss is None:
        initial_loss = final_loss
    return TrainReport(
        test_accuracy=accuracy(logits, labels, split.test_idx),
        train_accuracy=accuracy(logits, labels, train_idx),
        final_loss=final_loss,
        initial_loss=initial_loss,
        epochs_run=cfg.epochs,
        seed=cfg.seed,
    )
