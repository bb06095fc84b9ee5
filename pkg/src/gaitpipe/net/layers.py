"""Layers with manual forward/backward passes.

Tensors are numpy arrays shaped (batch, height, width, channels), row-major.
Every layer caches what its backward pass needs; backward(grad_out) returns
grad wrt the input and accumulates parameter gradients on Param objects.

Convolutions use 2x2 kernels, stride 1, "same" padding (one extra row/column
of zeros at the bottom/right, so spatial dims are preserved). Max pooling is
2x2, stride 1, valid, which shrinks each spatial dim by one.
"""

from __future__ import annotations

import numpy as np

from ..errors import BatchTooSmall, InputTooSmall, ShapeMismatch


class Param:
    """A learnable array plus its accumulated gradient."""

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = value
        self.grad = np.zeros_like(value)

    def zero_grad(self):
        self.grad.fill(0.0)


class Layer:
    name = "layer"
    params: list[Param] = []

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def output_shape(self, h: int, w: int, c: int) -> tuple[int, int, int]:
        """Static (height, width, channels) propagation for shape checking."""
        return h, w, c


def _check_4d(x, channels=None):
    if x.ndim != 4:
        raise ShapeMismatch(f"expected 4-D tensor, got shape {x.shape}")
    if channels is not None and x.shape[3] != channels:
        raise ShapeMismatch(f"expected {channels} channels, got {x.shape[3]}")


class Conv2D(Layer):
    """2x2 cross-correlation, stride 1, same padding (pad bottom/right)."""

    KSIZE = 2

    def __init__(self, in_channels: int, out_channels: int, rng: np.random.Generator):
        self.in_channels = in_channels
        self.out_channels = out_channels
        fan_in = self.KSIZE * self.KSIZE * in_channels
        w = rng.normal(0.0, np.sqrt(2.0 / fan_in), (self.KSIZE, self.KSIZE, in_channels, out_channels))
        self.weight = Param("weight", w)
        self.bias = Param("bias", np.zeros(out_channels))
        self.params = [self.weight, self.bias]
        self.name = f"conv2d({in_channels}->{out_channels})"
        self._cache = None

    _OFFSETS = ((0, 0), (0, 1), (1, 0), (1, 1))

    def forward(self, x, training):
        _check_4d(x, self.in_channels)
        n, h, w, _ = x.shape
        xp = np.pad(x, ((0, 0), (0, 1), (0, 1), (0, 0)))
        out = np.broadcast_to(self.bias.value, (n, h, w, self.out_channels)).copy()
        flat = out.reshape(-1, self.out_channels)
        for i, j in self._OFFSETS:
            view = xp[:, i : i + h, j : j + w, :].reshape(-1, self.in_channels)
            flat += view @ self.weight.value[i, j]
        self._cache = (xp, x.shape)
        return out

    def backward(self, grad_out):
        xp, in_shape = self._cache
        n, h, w, _ = in_shape
        g = grad_out.reshape(-1, self.out_channels)
        self.bias.grad += g.sum(axis=0)
        gxp = np.zeros_like(xp)
        for i, j in self._OFFSETS:
            view = xp[:, i : i + h, j : j + w, :].reshape(-1, self.in_channels)
            self.weight.grad[i, j] += view.T @ g
            gxp[:, i : i + h, j : j + w, :] += (g @ self.weight.value[i, j].T).reshape(
                n, h, w, self.in_channels
            )
        return gxp[:, :h, :w, :]

    def output_shape(self, h, w, c):
        if c != self.in_channels:
            raise ShapeMismatch(f"conv expects {self.in_channels} channels, got {c}")
        return h, w, self.out_channels


class BatchNorm(Layer):
    """Per-channel batch normalization over (batch, height, width)."""

    def __init__(self, channels: int, momentum: float = 0.1, eps: float = 1e-5):
        self.channels = channels
        self.momentum = momentum
        self.eps = eps
        self.gamma = Param("gamma", np.ones(channels))
        self.beta = Param("beta", np.zeros(channels))
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)
        self.params = [self.gamma, self.beta]
        self.name = f"batchnorm({channels})"
        self._cache = None

    def forward(self, x, training):
        _check_4d(x, self.channels)
        if training:
            if x.shape[0] < 2:
                raise BatchTooSmall("batch norm needs batch size >= 2 in train mode")
            mean = x.mean(axis=(0, 1, 2))
            var = x.var(axis=(0, 1, 2))
            self.running_mean = (1 - self.momentum) * self.running_mean + self.momentum * mean
            self.running_var = (1 - self.momentum) * self.running_var + self.momentum * var
        else:
            mean, var = self.running_mean, self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean) * inv_std
        self._cache = (xhat, inv_std, x.shape)
        return self.gamma.value * xhat + self.beta.value

    def backward(self, grad_out):
        xhat, inv_std, shape = self._cache
        m = shape[0] * shape[1] * shape[2]
        self.gamma.grad += (grad_out * xhat).sum(axis=(0, 1, 2))
        self.beta.grad += grad_out.sum(axis=(0, 1, 2))
        gxhat = grad_out * self.gamma.value
        return (
            gxhat
            - gxhat.mean(axis=(0, 1, 2))
            - xhat * (gxhat * xhat).sum(axis=(0, 1, 2)) / m
        ) * inv_std


class ReLU(Layer):
    name = "relu"

    def forward(self, x, training):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, grad_out):
        return grad_out * self._mask


class MaxPool2x2(Layer):
    """2x2 max pooling, stride 1, valid; ties go to the first element
    in row-major order (determinism for gradient routing)."""

    name = "maxpool(2x2,s1)"

    _OFFSETS = ((0, 0), (0, 1), (1, 0), (1, 1))

    def forward(self, x, training):
        _check_4d(x)
        n, h, w, c = x.shape
        if h < 2 or w < 2:
            raise InputTooSmall(f"maxpool needs height, width >= 2, got {h}x{w}")
        out = x[:, : h - 1, : w - 1, :]
        for i, j in self._OFFSETS[1:]:
            out = np.maximum(out, x[:, i : i + h - 1, j : j + w - 1, :])
        self._x = x
        self._out = out
        return out

    def backward(self, grad_out):
        x, out = self._x, self._out
        n, h, w, c = x.shape
        gx = np.zeros_like(x)
        unclaimed = np.ones(grad_out.shape, dtype=bool)
        for i, j in self._OFFSETS:
            view = x[:, i : i + h - 1, j : j + w - 1, :]
            hit = (view == out) & unclaimed
            gx[:, i : i + h - 1, j : j + w - 1, :] += grad_out * hit
            unclaimed &= ~hit
        return gx

    def output_shape(self, h, w, c):
        return h - 1, w - 1, c


class Dropout(Layer):
    """Inverted dropout: kept values scaled by 1/(1-rate); identity at infer."""

    def __init__(self, rate: float, rng: np.random.Generator | None = None):
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.name = f"dropout({rate})"
        self._mask = None

    def forward(self, x, training):
        if not training or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (self.rng.random(x.shape) < keep) / keep
        return x * self._mask

    def backward(self, grad_out):
        if self._mask is None:
            return grad_out
        return grad_out * self._mask


class Flatten(Layer):
    name = "flatten"

    def forward(self, x, training):
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out):
        return grad_out.reshape(self._in_shape)

    def output_shape(self, h, w, c):
        return 1, 1, h * w * c


class Dense(Layer):
    """Affine map on flattened features."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        self.in_features = in_features
        self.out_features = out_features
        w = rng.normal(0.0, np.sqrt(2.0 / in_features), (in_features, out_features))
        self.weight = Param("weight", w)
        self.bias = Param("bias", np.zeros(out_features))
        self.params = [self.weight, self.bias]
        self.name = f"dense({in_features}->{out_features})"
        self._x = None

    def forward(self, x, training):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeMismatch(
                f"dense expected (N, {self.in_features}), got {x.shape}"
            )
        self._x = x
        return x @ self.weight.value + self.bias.value

    def backward(self, grad_out):
        self.weight.grad += self._x.T @ grad_out
        self.bias.grad += grad_out.sum(axis=0)
        return grad_out @ self.weight.value.T

    def output_shape(self, h, w, c):
        if h * w * c != self.in_features:
            raise ShapeMismatch(
                f"dense expects {self.in_features} inputs, got {h * w * c}"
            )
        return 1, 1, self.out_features
