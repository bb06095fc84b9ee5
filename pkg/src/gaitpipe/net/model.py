"""The gait-image regression network.

Architecture: four conv groups with (16, 32, 48, 64) filters of size 2x2,
stride 1, each followed by batch norm and ReLU; the first three groups end
in a 2x2 stride-1 max pool (the fourth has none); then dropout(0.2), flatten
and a single-output dense regression head. On a 45x4x1 input the spatial
chain is 45x4 -> 44x3 -> 43x2 -> 42x1, giving 42*1*64 = 2688 dense inputs.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch
from .layers import BatchNorm, Conv2D, Dense, Dropout, Flatten, Layer, MaxPool2x2, ReLU

INPUT_HEIGHT = 45
INPUT_WIDTH = 4
INPUT_CHANNELS = 1
CONV_FILTERS = (16, 32, 48, 64)
DROPOUT_RATE = 0.2
DENSE_INPUTS = 2688

#: Expected (height, width, channels) after each conv group on a 45x4x1 input.
GROUP_OUTPUT_SHAPES = ((44, 3, 16), (43, 2, 32), (42, 1, 48), (42, 1, 64))


class Network:
    """An ordered layer stack with a scalar regression output."""

    def __init__(self, layers: list[Layer], dropout_rate: float = DROPOUT_RATE):
        self.layers = layers
        self.dropout_rate = dropout_rate
        self._check_shapes()

    def _check_shapes(self):
        h, w, c = INPUT_HEIGHT, INPUT_WIDTH, INPUT_CHANNELS
        group_ends = []
        for layer in self.layers:
            if isinstance(layer, Dropout):
                # shape entering dropout is the 4th (pool-less) group's output
                group_ends.append((h, w, c))
            h, w, c = layer.output_shape(h, w, c)
            if isinstance(layer, MaxPool2x2):
                group_ends.append((h, w, c))
        if (h, w, c) != (1, 1, 1):
            raise ShapeMismatch(f"network output must be scalar, got {(h, w, c)}")
        if tuple(group_ends) != GROUP_OUTPUT_SHAPES:
            raise ShapeMismatch(
                f"conv-group output chain {group_ends} != expected {GROUP_OUTPUT_SHAPES}"
            )

    @property
    def params(self):
        return [p for layer in self.layers for p in layer.params]

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        """Map (N, 45, 4, 1) images to (N,) speed predictions."""
        if x.ndim != 4 or x.shape[1:] != (INPUT_HEIGHT, INPUT_WIDTH, INPUT_CHANNELS):
            raise ShapeMismatch(
                f"expected (N, {INPUT_HEIGHT}, {INPUT_WIDTH}, {INPUT_CHANNELS}), "
                f"got {x.shape}"
            )
        out = x
        for layer in self.layers:
            out = layer.forward(out, training)
            if not np.isfinite(out).all():
                raise FloatingPointError(f"non-finite activations after {layer.name}")
        return out[:, 0]

    def backward(self, grad_pred: np.ndarray) -> np.ndarray:
        grad = grad_pred[:, None]
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def fingerprint(self) -> str:
        """Architecture identity line used to validate serialized models."""
        names = ";".join(layer.name for layer in self.layers)
        return f"input={INPUT_HEIGHT}x{INPUT_WIDTH}x{INPUT_CHANNELS}|{names}"


def build_network(seed: int = 0) -> Network:
    """Construct the fixed architecture with seeded weight initialization."""
    rng = np.random.default_rng(seed)
    layers: list[Layer] = []
    in_ch = INPUT_CHANNELS
    for gi, out_ch in enumerate(CONV_FILTERS):
        layers.append(Conv2D(in_ch, out_ch, rng))
        layers.append(BatchNorm(out_ch))
        layers.append(ReLU())
        if gi < 3:
            layers.append(MaxPool2x2())
        in_ch = out_ch
    layers.append(Dropout(DROPOUT_RATE, rng))
    layers.append(Flatten())
    layers.append(Dense(DENSE_INPUTS, 1, rng))
    return Network(layers)
