"""Mini-batch training with adaptive-moment gradient descent.

The loss minimized is mean squared error (same minimizer as RMSE, smoother
gradient at zero error); the reported metric is RMSE. Training is
deterministic given the config seed: batch shuffling and dropout masks both
derive from one seeded generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import Divergence, ShapeMismatch
from .layers import Dropout
from .model import Network


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 100
    batch_size: int = 64
    learning_rate: float = 1e-3
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


class Adam:
    """Adaptive moment estimation over a network's parameter list."""

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p.value) for p in params]
        self.v = [np.zeros_like(p.value) for p in params]
        self.t = 0

    def step(self):
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for p, m, v in zip(self.params, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * p.grad
            v *= self.beta2
            v += (1.0 - self.beta2) * p.grad**2
            p.value -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


def mse_loss_and_grad(pred: np.ndarray, target: np.ndarray):
    """Mean squared error and its gradient wrt pred."""
    if pred.shape != target.shape:
        raise ShapeMismatch(f"pred {pred.shape} vs target {target.shape}")
    err = pred - target
    loss = float(np.mean(err**2))
    return loss, 2.0 * err / len(err)


def rmse(pred: np.ndarray, target: np.ndarray) -> float:
    if pred.shape != target.shape:
        raise ShapeMismatch(f"pred {pred.shape} vs target {target.shape}")
    return float(np.sqrt(np.mean((pred - target) ** 2)))


def train(
    network: Network,
    images: np.ndarray,
    labels: np.ndarray,
    config: TrainingConfig = TrainingConfig(),
) -> list[float]:
    """Train in place; returns per-epoch mean training loss (MSE).

    Raises Divergence (carrying the history so far) if the loss goes
    non-finite.
    """
    n = len(images)
    if n == 0:
        raise ShapeMismatch("empty training set")
    if labels.shape != (n,):
        raise ShapeMismatch(f"labels must be ({n},), got {labels.shape}")
    rng = np.random.default_rng(config.seed)
    for layer in network.layers:
        if isinstance(layer, Dropout):
            layer.rng = rng
    opt = Adam(
        network.params, config.learning_rate, config.beta1, config.beta2, config.eps
    )
    history: list[float] = []
    for _epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for lo in range(0, n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            if len(idx) < 2:
                continue  # batch norm needs >= 2 samples
            network.zero_grad()
            try:
                pred = network.forward(images[idx], training=True)
            except FloatingPointError as exc:
                raise Divergence(str(exc), history) from exc
            loss, grad = mse_loss_and_grad(pred, labels[idx])
            if not np.isfinite(loss):
                raise Divergence(f"training loss {loss} at epoch {_epoch}", history)
            network.backward(grad)
            opt.step()
            epoch_loss += loss * len(idx)
        history.append(epoch_loss / n)
    return history


def predict(network: Network, images: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Inference-mode predictions (dropout off, batch-norm running stats)."""
    out = []
    for lo in range(0, len(images), batch_size):
        out.append(network.forward(images[lo : lo + batch_size], training=False))
    return np.concatenate(out)
