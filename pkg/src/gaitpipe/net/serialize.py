"""Versioned text serialization of trained models.

Format:
    line 1: ``gaitpipe-model v1``
    line 2: ``arch=<architecture fingerprint>``
    metadata lines: ``channels=``, ``window_seconds=``, ``cutoff_hz=``,
        ``num_taps=``, ``normalizer=`` (mean, std, active flags, or none)
    then, per stateful layer: ``layer <index> <name>`` followed by
        ``array <name> <dim,dim,...>`` + one line of values (17 significant
        digits, so the float round-trip is exact), and a final ``end``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data_model import WINDOW_SECONDS
from ..errors import CorruptModelFile
from ..imaging import ChannelSet, Normalizer
from .layers import BatchNorm, Conv2D, Dense
from .model import Network, build_network

MAGIC = "gaitpipe-model v1"


@dataclass(frozen=True)
class TrainedModel:
    """A trained network plus everything prediction needs to reproduce
    the training-time preprocessing."""

    network: Network
    normalizer: Normalizer | None
    channels: ChannelSet
    window_seconds: float = WINDOW_SECONDS
    cutoff_hz: float = 15.0
    num_taps: int = 65


def _layer_arrays(layer):
    if isinstance(layer, Conv2D) or isinstance(layer, Dense):
        return [("weight", layer.weight.value), ("bias", layer.bias.value)]
    if isinstance(layer, BatchNorm):
        return [
            ("gamma", layer.gamma.value),
            ("beta", layer.beta.value),
            ("running_mean", layer.running_mean),
            ("running_var", layer.running_var),
        ]
    return []


def _fmt(arr: np.ndarray) -> str:
    return " ".join(f"{v:.17g}" for v in np.asarray(arr).ravel())


def save_model(model: TrainedModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(MAGIC + "\n")
        fh.write(f"arch={model.network.fingerprint()}\n")
        fh.write(f"channels={model.channels.value}\n")
        fh.write(f"window_seconds={model.window_seconds:.17g}\n")
        fh.write(f"cutoff_hz={model.cutoff_hz:.17g}\n")
        fh.write(f"num_taps={model.num_taps}\n")
        if model.normalizer is None:
            fh.write("normalizer=none\n")
        else:
            n = model.normalizer
            stats = np.concatenate([n.mean, n.std, n.active.astype(float)])
            fh.write(f"normalizer={_fmt(stats)}\n")
        for i, layer in enumerate(model.network.layers):
            arrays = _layer_arrays(layer)
            if not arrays:
                continue
            fh.write(f"layer {i} {layer.name}\n")
            for name, arr in arrays:
                dims = ",".join(str(d) for d in arr.shape)
                fh.write(f"array {name} {dims}\n")
                fh.write(_fmt(arr) + "\n")
        fh.write("end\n")


def load_model(path: str) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    try:
        if not lines or lines[0] != MAGIC:
            raise CorruptModelFile(f"{path}: bad magic line")
        header = {}
        pos = 1
        while pos < len(lines) and "=" in lines[pos] and not lines[pos].startswith("layer "):
            key, val = lines[pos].split("=", 1)
            header[key] = val
            pos += 1
        network = build_network(seed=0)
        if header["arch"] != network.fingerprint():
            raise CorruptModelFile(
                f"{path}: architecture fingerprint mismatch: {header['arch']!r}"
            )
        channels = ChannelSet(header["channels"])
        norm = None
        if header["normalizer"] != "none":
            stats = np.array(header["normalizer"].split(), dtype=float)
            mean, std, act = np.split(stats, 3)
            norm = Normalizer(mean, std, act > 0.5)
        while pos < len(lines) and lines[pos] != "end":
            tag, idx_s, name = lines[pos].split(" ", 2)
            if tag != "layer":
                raise CorruptModelFile(f"{path}: expected layer line, got {lines[pos]!r}")
            layer = network.layers[int(idx_s)]
            if layer.name != name:
                raise CorruptModelFile(f"{path}: layer {idx_s} is {layer.name}, file says {name}")
            pos += 1
            for aname, arr in _layer_arrays(layer):
                atag, fname, dims = lines[pos].split(" ")
                if atag != "array" or fname != aname:
                    raise CorruptModelFile(f"{path}: expected array {aname}")
                shape = tuple(int(d) for d in dims.split(","))
                if shape != arr.shape:
                    raise CorruptModelFile(
                        f"{path}: array {aname} shape {shape} != {arr.shape}"
                    )
                values = np.array(lines[pos + 1].split(), dtype=float).reshape(shape)
                arr[...] = values
                pos += 2
        if pos >= len(lines) or lines[pos] != "end":
            raise CorruptModelFile(f"{path}: truncated model file (missing end)")
    except CorruptModelFile:
        raise
    except (KeyError, ValueError, IndexError) as exc:
        raise CorruptModelFile(f"{path}: {exc}") from exc
    return TrainedModel(
        network=network,
        normalizer=norm,
        channels=channels,
        window_seconds=float(header["window_seconds"]),
        cutoff_hz=float(header["cutoff_hz"]),
        num_taps=int(header["num_taps"]),
    )
