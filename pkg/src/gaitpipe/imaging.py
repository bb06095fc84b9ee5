"""Gait-image construction, normalization, and train/eval splitting.

Each 2 s window of an aligned series becomes one 45x4 image (columns
va, ha, vg, hg); the window's rows are reduced to 45 by averaging over 45
equal time bins, with fractional samples weighted by their overlap so the
reduction is exact for constants and commutes with affine maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .alignment import AlignedSeries, align_recording
from .data_model import WINDOW_SECONDS, Recording
from .dsp import FirFilter, design_lowpass, filter_recording
from .errors import (
    ConstantColumn,
    CorruptModelFile,
    EmptyDataset,
    TooFewImages,
    WindowTooShort,
)

IMAGE_ROWS = 45
IMAGE_COLS = 4


class ChannelSet(Enum):
    """Sensor ablation arms; excluded columns are zero-filled."""

    ACC = "acc"
    GYRO = "gyro"
    BOTH = "both"

    @property
    def zeroed_columns(self) -> tuple[int, ...]:
        if self is ChannelSet.ACC:
            return (2, 3)  # vg, hg
        if self is ChannelSet.GYRO:
            return (0, 1)  # va, ha
        return ()


@dataclass(frozen=True)
class GaitImage:
    """A 45x4 matrix over one 2 s window, labeled with ground-truth speed."""

    pixels: np.ndarray
    label: float | None
    subject_id: str
    start_t_ns: int

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=np.float64)
        if p.shape != (IMAGE_ROWS, IMAGE_COLS):
            raise ValueError(f"pixels must be {IMAGE_ROWS}x{IMAGE_COLS}, got {p.shape}")
        if not np.isfinite(p).all():
            raise ValueError("pixels must be finite")
        if self.label is not None and not self.label > 0:
            raise ValueError(f"label must be > 0, got {self.label}")
        object.__setattr__(self, "pixels", p)


@dataclass(frozen=True)
class Normalizer:
    """Per-column z-score statistics fit on the training set only.

    Masked (all-zero) columns are passed through untouched.
    """

    mean: np.ndarray
    std: np.ndarray
    active: np.ndarray  # bool per column

    def apply(self, image: GaitImage) -> GaitImage:
        p = image.pixels.copy()
        p[:, self.active] = (p[:, self.active] - self.mean[self.active]) / self.std[
            self.active
        ]
        return replace(image, pixels=p)

    def apply_all(self, images: list[GaitImage]) -> list[GaitImage]:
        return [self.apply(im) for im in images]


@dataclass(frozen=True)
class DatasetSplit:
    train: list[GaitImage]
    eval: list[GaitImage]
    split_fraction: float


def window_to_image(
    rows: np.ndarray,
    label: float | None = None,
    subject_id: str = "",
    start_t_ns: int = 0,
) -> GaitImage:
    """Reduce one window's (N, 4) rows to a 45x4 image by equal-time binning."""
    x = np.asarray(rows, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != IMAGE_COLS:
        raise ValueError(f"rows must be (N, {IMAGE_COLS})")
    n = x.shape[0]
    if n < IMAGE_ROWS:
        raise WindowTooShort(f"window has {n} rows, need >= {IMAGE_ROWS}")
    pixels = bin_means(x, IMAGE_ROWS)
    return GaitImage(pixels, label, subject_id, start_t_ns)


def bin_means(x: np.ndarray, n_bins: int) -> np.ndarray:
    """Average (N, C) rows over n_bins equal-width time bins.

    Each row is treated as constant over its sampling interval; a sample
    straddling a bin edge contributes to both bins in proportion to overlap.
    """
    n = x.shape[0]
    edges = np.arange(n_bins + 1) * (n / n_bins)
    csum = np.vstack([np.zeros(x.shape[1]), np.cumsum(x, axis=0)])
    idx = np.minimum(edges.astype(int), n)
    frac = edges - idx
    at_edges = csum[idx] + frac[:, None] * x[np.minimum(idx, n - 1)]
    return np.diff(at_edges, axis=0) / (n / n_bins)


def mask_channels(image: GaitImage, channels: ChannelSet) -> GaitImage:
    cols = channels.zeroed_columns
    if not cols:
        return image
    p = image.pixels.copy()
    p[:, list(cols)] = 0.0
    return replace(image, pixels=p)


def images_from_aligned(
    aligned: AlignedSeries,
    window_overlap: float = 0.0,
    start_row: int = 0,
    end_row: int | None = None,
) -> list[GaitImage]:
    """Slide 2 s windows (stride set by overlap) over [start_row, end_row)."""
    if not 0.0 <= window_overlap < 1.0:
        raise ValueError(f"window_overlap must be in [0, 1), got {window_overlap}")
    n_per = int(round(aligned.window_seconds * aligned.sample_rate))
    stride = max(1, int(round(n_per * (1.0 - window_overlap))))
    end = len(aligned) if end_row is None else end_row
    images = []
    for lo in range(start_row, end - n_per + 1, stride):
        images.append(
            window_to_image(
                aligned.values[lo : lo + n_per],
                label=aligned.true_speed,
                subject_id=aligned.subject_id,
                start_t_ns=int(aligned.t_ns[lo]),
            )
        )
    return images


def build_dataset(
    recordings: list[Recording],
    channels: ChannelSet = ChannelSet.BOTH,
    window_overlap: float = 0.0,
    fir: FirFilter | None = None,
    window_seconds: float = WINDOW_SECONDS,
) -> list[GaitImage]:
    """Full filter -> align -> window path over a list of recordings."""
    images = []
    for rec in recordings:
        if fir is None:
            fir = design_lowpass(15.0, rec.sample_rate)
        aligned = align_recording(filter_recording(rec, fir), window_seconds)
        for im in images_from_aligned(aligned, window_overlap):
            images.append(mask_channels(im, channels))
    if not images:
        raise EmptyDataset("no images produced from the given recordings")
    return images


def fit_normalizer(train: list[GaitImage]) -> Normalizer:
    """Per-column mean/std over all training pixels; all-zero columns skipped."""
    if not train:
        raise EmptyDataset("cannot fit a normalizer on an empty training set")
    stacked = np.concatenate([im.pixels for im in train], axis=0)
    active = np.any(stacked != 0.0, axis=0)
    mean = np.where(active, stacked.mean(axis=0), 0.0)
    std = np.where(active, stacked.std(axis=0), 1.0)
    bad = active & (std <= 0.0)
    if np.any(bad):
        raise ConstantColumn(f"constant non-zero column(s): {np.flatnonzero(bad)}")
    return Normalizer(mean, np.where(active, std, 1.0), active)


def split_by_time(
    images_per_recording: list[list[GaitImage]], fraction: float = 0.7
) -> DatasetSplit:
    """Per recording, first ceil(fraction * n) images (time order) -> train."""
    train: list[GaitImage] = []
    evals: list[GaitImage] = []
    for imgs in images_per_recording:
        if len(imgs) < 2:
            raise TooFewImages(
                f"recording contributes {len(imgs)} image(s); need >= 2 to split"
            )
        ordered = sorted(imgs, key=lambda im: im.start_t_ns)
        cut = math.ceil(fraction * len(ordered))
        train.extend(ordered[:cut])
        evals.extend(ordered[cut:])
    return DatasetSplit(train, evals, fraction)


# --- image store ------------------------------------------------------------

def save_images(
    images: list[GaitImage], path: str, channels: ChannelSet, norm: Normalizer | None = None
) -> None:
    """Write the dataset text format: header lines then one line per image."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"count={len(images)}\n")
        fh.write(f"rows={IMAGE_ROWS}\n")
        fh.write(f"cols={IMAGE_COLS}\n")
        fh.write(f"channels={channels.value}\n")
        if norm is None:
            fh.write("normalizer=none\n")
        else:
            stats = np.concatenate([norm.mean, norm.std, norm.active.astype(float)])
            fh.write("normalizer=" + " ".join(f"{v:.17g}" for v in stats) + "\n")
        for im in images:
            label = "none" if im.label is None else f"{im.label:.17g}"
            pix = " ".join(f"{v:.17g}" for v in im.pixels.ravel())
            fh.write(f"{im.subject_id},{label},{im.start_t_ns},{pix}\n")


def load_images(path: str) -> tuple[list[GaitImage], ChannelSet, Normalizer | None]:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    try:
        header = dict(line.split("=", 1) for line in lines[:5])
        count = int(header["count"])
        if int(header["rows"]) != IMAGE_ROWS or int(header["cols"]) != IMAGE_COLS:
            raise CorruptModelFile(f"{path}: unsupported image dimensions")
        channels = ChannelSet(header["channels"])
        norm = None
        if header["normalizer"] != "none":
            stats = np.array(header["normalizer"].split(), dtype=float)
            mean, std, act = np.split(stats, 3)
            norm = Normalizer(mean, std, act > 0.5)
        body = lines[5:]
        if len(body) != count:
            raise CorruptModelFile(f"{path}: expected {count} images, got {len(body)}")
        images = []
        for line in body:
            subject, label_s, start_s, pix_s = line.split(",", 3)
            label = None if label_s == "none" else float(label_s)
            pixels = np.array(pix_s.split(), dtype=float).reshape(IMAGE_ROWS, IMAGE_COLS)
            images.append(GaitImage(pixels, label, subject, int(start_s)))
    except CorruptModelFile:
        raise
    except (KeyError, ValueError, IndexError) as exc:
        raise CorruptModelFile(f"{path}: {exc}") from exc
    return images, channels, norm
