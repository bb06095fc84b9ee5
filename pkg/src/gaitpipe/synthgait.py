"""Parametric synthetic IMU gait generator.

The world-frame signal is gravity plus a vertical sinusoid at twice the step
frequency (each foot strike bounces the body) with an optional harmonic, a
horizontal sinusoid at the step frequency, and gyroscope oscillation mostly
about the horizontal axes. The whole stream is rotated into a random device
frame per recording, then Gaussian noise is added in the device frame.
Everything is deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data_model import Recording
from .errors import InvalidParams

GRAVITY = 9.81


@dataclass(frozen=True)
class GaitParams:
    """Walking-signal parameters; step frequency is c0 + c1 * speed."""

    speed: float  # m/s
    step_freq_c0: float = 1.4
    step_freq_c1: float = 0.6
    accel_amp_per_speed: float = 2.0  # m/s^2 per m/s of walking speed
    horizontal_ratio: float = 0.5
    gyro_amp_per_freq: float = 0.8  # rad/s per Hz of step frequency
    accel_noise: float = 0.4  # sigma, m/s^2
    gyro_noise: float = 0.15  # sigma, rad/s
    harmonics: int = 2
    harmonic_ratio: float = 0.3
    # per-recording multiplicative amplitude jitter (uniform in 1 +/- value),
    # drawn independently for each sensor: models trial-to-trial gait
    # variability that neither sensor alone can disambiguate from speed
    accel_amp_jitter: float = 0.15
    gyro_amp_jitter: float = 0.15

    def __post_init__(self):
        if not self.speed > 0:
            raise InvalidParams(f"speed must be > 0, got {self.speed}")
        if self.accel_amp_per_speed < 0 or self.horizontal_ratio < 0:
            raise InvalidParams("amplitudes must be >= 0")
        if self.accel_noise < 0 or self.gyro_noise < 0:
            raise InvalidParams("noise sigmas must be >= 0")
        if self.harmonics not in (1, 2):
            raise InvalidParams("harmonics must be 1 or 2")
        if not 0.0 <= self.accel_amp_jitter < 1.0 or not 0.0 <= self.gyro_amp_jitter < 1.0:
            raise InvalidParams("amplitude jitters must be in [0, 1)")

    @property
    def step_frequency(self) -> float:
        return self.step_freq_c0 + self.step_freq_c1 * self.speed


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random 3-D rotation matrix (via a random unit quaternion)."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def world_frame_signals(
    params: GaitParams, duration_seconds: float, sample_rate_hz: float
) -> tuple[np.ndarray, np.ndarray]:
    """Noiseless (accel, gyro) streams in the fixed world frame, gravity included."""
    n = int(round(duration_seconds * sample_rate_hz))
    t = np.arange(n) / sample_rate_hz
    f = params.step_frequency
    amp = params.accel_amp_per_speed * params.speed
    vertical = amp * np.sin(2 * np.pi * (2 * f) * t)
    if params.harmonics == 2:
        vertical += amp * params.harmonic_ratio * np.sin(2 * np.pi * (4 * f) * t)
    horizontal = params.horizontal_ratio * amp * np.sin(2 * np.pi * f * t)
    accel = np.column_stack(
        [horizontal, np.zeros(n), GRAVITY + vertical]
    )
    g_amp = params.gyro_amp_per_freq * f
    gyro = np.column_stack(
        [
            g_amp * np.sin(2 * np.pi * f * t),
            0.6 * g_amp * np.sin(2 * np.pi * f * t + np.pi / 3),
            0.3 * g_amp * np.sin(2 * np.pi * (2 * f) * t),
        ]
    )
    return accel, gyro


def generate_recording(
    params: GaitParams,
    duration_seconds: float,
    sample_rate_hz: float = 100.0,
    seed: int = 0,
    subject_id: str = "synthetic",
    rotation: np.ndarray | None = None,
) -> Recording:
    """One labeled recording in a (possibly random) device orientation."""
    if duration_seconds < 4.0:
        raise InvalidParams(f"duration must be >= 4 s, got {duration_seconds}")
    if sample_rate_hz <= 0:
        raise InvalidParams(f"sample rate must be > 0, got {sample_rate_hz}")
    rng = np.random.default_rng(seed)
    rot = random_rotation(rng) if rotation is None else np.asarray(rotation)
    ja, jg = params.accel_amp_jitter, params.gyro_amp_jitter
    effective = replace(
        params,
        accel_amp_per_speed=params.accel_amp_per_speed * rng.uniform(1 - ja, 1 + ja),
        gyro_amp_per_freq=params.gyro_amp_per_freq * rng.uniform(1 - jg, 1 + jg),
    )
    accel_w, gyro_w = world_frame_signals(effective, duration_seconds, sample_rate_hz)
    accel = accel_w @ rot.T
    gyro = gyro_w @ rot.T
    if params.accel_noise > 0:
        accel = accel + rng.normal(0.0, params.accel_noise, accel.shape)
    if params.gyro_noise > 0:
        gyro = gyro + rng.normal(0.0, params.gyro_noise, gyro.shape)
    n = len(accel)
    t_ns = (np.arange(n) * round(1e9 / sample_rate_hz)).astype(np.int64)
    return Recording(
        subject_id=subject_id,
        true_speed=params.speed,
        sample_rate=sample_rate_hz,
        t_ns=t_ns,
        accel=accel,
        gyro=gyro,
    )


def generate_cohort(
    n_subjects: int,
    speeds_mps: list[float],
    minutes_per_speed: float,
    seed: int = 0,
    sample_rate_hz: float = 100.0,
    base_params: GaitParams | None = None,
) -> list[Recording]:
    """One recording per (subject, speed), with per-subject parameter jitter.

    Each subject's gait constants (step-frequency intercept/slope and accel
    amplitude scale) are perturbed by up to +/-10%, seeded per subject.
    """
    if n_subjects < 1:
        raise InvalidParams(f"n_subjects must be >= 1, got {n_subjects}")
    if not speeds_mps:
        raise InvalidParams("speeds_mps must be non-empty")
    base = base_params if base_params is not None else GaitParams(speed=1.0)
    root = np.random.SeedSequence(seed)
    subject_seqs = root.spawn(n_subjects)
    recordings = []
    for si, sseq in enumerate(subject_seqs):
        srng = np.random.default_rng(sseq)
        jitter = srng.uniform(0.9, 1.1, size=3)
        rec_seeds = srng.integers(0, 2**31 - 1, size=len(speeds_mps))
        for vi, speed in enumerate(speeds_mps):
            params = replace(
                base,
                speed=speed,
                step_freq_c0=base.step_freq_c0 * jitter[0],
                step_freq_c1=base.step_freq_c1 * jitter[1],
                accel_amp_per_speed=base.accel_amp_per_speed * jitter[2],
            )
            recordings.append(
                generate_recording(
                    params,
                    duration_seconds=minutes_per_speed * 60.0,
                    sample_rate_hz=sample_rate_hz,
                    seed=int(rec_seeds[vi]),
                    subject_id=f"S{si + 1:02d}",
                )
            )
    return recordings
