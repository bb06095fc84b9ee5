"""Offline training, online prediction, and the three experiment jobs.

run_training builds the dataset (per-recording time split: the first 70% of
each recording's windows, with overlap augmentation, trains; the disjoint
tail evaluates), fits the normalizer on training images only, optionally
subsamples the training set to an image budget, trains the network and
evaluates on the held-out windows. run_prediction replays the shared
filter/align/window stages on a raw recording with a saved model.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .alignment import align_recording
from .data_model import WINDOW_SECONDS, Recording, SessionManifest, load_session
from .dsp import design_lowpass, filter_recording
from .errors import Divergence, InsufficientImages, TooFewImages, WindowTooShort
from .imaging import (
    ChannelSet,
    GaitImage,

    fit_normalizer,
    images_from_aligned,
    mask_channels,
)
from .net import TrainingConfig, build_network, predict, train
from .net.serialize import TrainedModel


@dataclass(frozen=True)
class PipelineConfig:
    window_seconds: float = WINDOW_SECONDS
    cutoff_hz: float = 15.0
    num_taps: int = 65
    split_fraction: float = 0.7
    train_overlap: float = 0.5
    epochs: int = 100
    batch_size: int = 64
    learning_rate: float = 1e-3
    seed: int = 0

    def config_hash(self) -> str:
        blob = ",".join(f"{k}={v!r}" for k, v in sorted(asdict(self).items()))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def training_config(self) -> TrainingConfig:
        return TrainingConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            seed=self.seed,
        )


@dataclass(frozen=True)
class EvaluationReport:
    """Per-subject and aggregate RMSE plus the raw (true, predicted) pairs."""

    per_subject_rmse: dict[str, float]
    aggregate_rmse: float
    pairs: list[tuple[str, int, float, float]]  # subject, start_ns, true, pred
    metadata: dict[str, str] = field(default_factory=dict)

    def recompute_rmse(self) -> float:
        err = np.array([p[3] - p[2] for p in self.pairs])
        return float(np.sqrt(np.mean(err**2)))


def _aggregate(pairs) -> tuple[dict[str, float], float]:
    subjects: dict[str, list[float]] = {}
    for subject, _t, true, pred in pairs:
        subjects.setdefault(subject, []).append((pred - true) ** 2)
    per_subject = {
        s: float(np.sqrt(np.mean(sq))) for s, sq in sorted(subjects.items())
    }
    all_sq = [sq for sqs in subjects.values() for sq in sqs]
    return per_subject, float(np.sqrt(np.mean(all_sq)))


def _resolve_recordings(source) -> list[Recording]:
    if isinstance(source, SessionManifest):
        return load_session(source)
    return list(source)


def split_windows(
    recordings: list[Recording], config: PipelineConfig, channels: ChannelSet
) -> tuple[list[list[GaitImage]], list[list[GaitImage]]]:
    """Per-recording (train images, eval images) under the time split.

    Training windows slide with the configured overlap inside the first
    ceil(split_fraction * W) of the W non-overlapping windows; evaluation
    windows are the remaining non-overlapping ones. No window straddles the
    split point, so the two sets cannot overlap in time.
    """
    train_per_rec: list[list[GaitImage]] = []
    eval_per_rec: list[list[GaitImage]] = []
    for rec in recordings:
        fir = design_lowpass(config.cutoff_hz, rec.sample_rate, config.num_taps)
        aligned = align_recording(filter_recording(rec, fir), config.window_seconds)
        n_per = int(round(config.window_seconds * rec.sample_rate))
        n_windows = len(aligned) // n_per
        if n_windows < 2:
            raise TooFewImages(
                f"{rec.subject_id}: {n_windows} window(s); need >= 2 to split"
            )
        n_train = math.ceil(config.split_fraction * n_windows)
        train_imgs = images_from_aligned(
            aligned, config.train_overlap, start_row=0, end_row=n_train * n_per
        )
        eval_imgs = images_from_aligned(
            aligned, 0.0, start_row=n_train * n_per, end_row=n_windows * n_per
        )
        train_per_rec.append([mask_channels(im, channels) for im in train_imgs])
        eval_per_rec.append([mask_channels(im, channels) for im in eval_imgs])
    return train_per_rec, eval_per_rec


def _to_arrays(images: list[GaitImage]):
    x = np.stack([im.pixels for im in images])[..., None]
    y = np.array([im.label if im.label is not None else np.nan for im in images])
    return x, y


def run_training(
    source,
    channels: ChannelSet = ChannelSet.BOTH,
    m_budget: int | None = None,
    config: PipelineConfig = PipelineConfig(),
) -> tuple[TrainedModel, EvaluationReport, list[float]]:
    """Train and evaluate; returns (model, report, loss history).

    source is a SessionManifest or a list of Recording. m_budget subsamples
    the training set to exactly that many images (seeded, uniform, without
    replacement); None uses all images. On Divergence the report is still
    produced from the last parameters, flagged in metadata.
    """
    recordings = _resolve_recordings(source)
    train_per_rec, eval_per_rec = split_windows(recordings, config, channels)
    train_images = [im for imgs in train_per_rec for im in imgs]
    eval_images = [im for imgs in eval_per_rec for im in imgs]
    norm = fit_normalizer(train_images)
    if m_budget is not None:
        if m_budget > len(train_images):
            raise InsufficientImages(m_budget, len(train_images))
        rng = np.random.default_rng(config.seed)
        keep = np.sort(rng.choice(len(train_images), m_budget, replace=False))
        train_images = [train_images[i] for i in keep]

    x_train, y_train = _to_arrays(norm.apply_all(train_images))
    network = build_network(seed=config.seed)
    diverged = False
    try:
        history = train(network, x_train, y_train, config.training_config())
    except Divergence as exc:
        diverged = True
        history = exc.history

    model = TrainedModel(
        network=network,
        normalizer=norm,
        channels=channels,
        window_seconds=config.window_seconds,
        cutoff_hz=config.cutoff_hz,
        num_taps=config.num_taps,
    )
    x_eval, y_eval = _to_arrays(norm.apply_all(eval_images))
    preds = predict(network, x_eval)
    pairs = [
        (im.subject_id, im.start_t_ns, float(t), float(p))
        for im, t, p in zip(eval_images, y_eval, preds)
    ]
    per_subject, aggregate = _aggregate(pairs)
    report = EvaluationReport(
        per_subject_rmse=per_subject,
        aggregate_rmse=aggregate,
        pairs=pairs,
        metadata={
            "channels": channels.value,
            "m": "all" if m_budget is None else str(m_budget),
            "train_images": str(len(train_images)),
            "eval_images": str(len(eval_images)),
            "seed": str(config.seed),
            "config_hash": config.config_hash(),
            "diverged": str(diverged).lower(),
        },
    )
    return model, report, history


def run_prediction(
    model: TrainedModel, recording: Recording
) -> list[tuple[int, float]]:
    """One (window start ns, speed m/s) per consecutive 2 s window."""
    n_per = int(round(model.window_seconds * recording.sample_rate))
    if len(recording) < n_per:
        raise WindowTooShort(
            f"recording of {recording.duration_seconds:.2f} s shorter than one "
            f"{model.window_seconds} s window"
        )
    fir = design_lowpass(model.cutoff_hz, recording.sample_rate, model.num_taps)
    aligned = align_recording(filter_recording(recording, fir), model.window_seconds)
    images = [
        mask_channels(im, model.channels)
        for im in images_from_aligned(aligned, 0.0)
    ]
    if model.normalizer is not None:
        images = model.normalizer.apply_all(images)
    x, _ = _to_arrays(images)
    preds = predict(model.network, x)
    return [(im.start_t_ns, float(p)) for im, p in zip(images, preds)]


def evaluate_model(model: TrainedModel, recordings: list[Recording]) -> EvaluationReport:
    """Run prediction over labeled recordings and aggregate RMSE."""
    pairs = []
    for rec in recordings:
        for start_ns, pred in run_prediction(model, rec):
            if rec.true_speed is not None:
                pairs.append((rec.subject_id, start_ns, float(rec.true_speed), pred))
    per_subject, aggregate = _aggregate(pairs)
    return EvaluationReport(
        per_subject_rmse=per_subject,
        aggregate_rmse=aggregate,
        pairs=pairs,
        metadata={"channels": model.channels.value, "mode": "evaluate"},
    )


def run_ablation(
    source,
    config: PipelineConfig = PipelineConfig(),
    m_budget: int | None = None,
) -> dict[ChannelSet, EvaluationReport]:
    """Three arms (ACC, GYRO, BOTH) with identical config and seeds."""
    recordings = _resolve_recordings(source)
    reports = {}
    for channels in (ChannelSet.ACC, ChannelSet.GYRO, ChannelSet.BOTH):
        _model, report, _hist = run_training(recordings, channels, m_budget, config)
        reports[channels] = report
    return reports


def run_m_sweep(
    source,
    m_values: list[int],
    config: PipelineConfig = PipelineConfig(),
    channels: ChannelSet = ChannelSet.BOTH,
) -> list[tuple[int, EvaluationReport]]:
    """One training run per image budget M, shared eval set and seed."""
    recordings = _resolve_recordings(source)
    out = []
    for m in m_values:
        _model, report, _hist = run_training(recordings, channels, m, config)
        out.append((m, report))
    return out
