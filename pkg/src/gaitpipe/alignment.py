"""Orientation-independent vertical/horizontal decomposition.

The gravity direction is estimated per 2 s interval as the per-axis mean of
the (filtered) accelerometer stream. Each accelerometer sample is reduced to
its dynamic component (gravity subtracted) and split into the magnitude of
its projection onto the gravity axis and the magnitude of the orthogonal
remainder. Gyroscope vectors are projected directly, without subtraction.
Projections depend only on inner products, so the output is invariant under
any fixed rotation of the device frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import WINDOW_SECONDS, Recording
from .errors import DegenerateGravity, EmptyWindow, WindowTooShort

GRAVITY_NORM_FLOOR = 1e-6

#: Column order of an aligned row.
CHANNEL_NAMES = ("va", "ha", "vg", "hg")


@dataclass(frozen=True)
class GravityEstimate:
    """Per-axis mean acceleration over one sampling interval, m/s^2."""

    vx: float
    vy: float
    vz: float

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.vz])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True)
class AlignedSeries:
    """Per-sample magnitudes (va, ha, vg, hg): vertical/horizontal x accel/gyro."""

    t_ns: np.ndarray
    values: np.ndarray  # (N, 4), columns per CHANNEL_NAMES
    window_seconds: float
    sample_rate: float
    subject_id: str = ""
    true_speed: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 4:
            raise ValueError("values must be (N, 4)")
        if v.shape[0] != len(self.t_ns):
            raise ValueError("values and t_ns length mismatch")
        if not np.isfinite(v).all() or np.any(v < 0):
            raise ValueError("aligned values must be finite and >= 0")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.t_ns)


def estimate_gravity(samples: np.ndarray) -> GravityEstimate:
    """Component-wise mean of accel vectors over one interval."""
    a = np.asarray(samples, dtype=np.float64)
    if a.size == 0:
        raise EmptyWindow("no samples in gravity interval")
    if a.ndim != 2 or a.shape[1] != 3:
        raise ValueError("samples must be (N, 3)")
    v = a.mean(axis=0)
    if np.linalg.norm(v) <= GRAVITY_NORM_FLOOR:
        raise DegenerateGravity(f"gravity norm {np.linalg.norm(v):.3g} below floor")
    return GravityEstimate(float(v[0]), float(v[1]), float(v[2]))


def decompose(
    vectors: np.ndarray, gravity: GravityEstimate, subtract_gravity: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Split vectors into (|vertical|, |horizontal|) against the gravity axis.

    With subtract_gravity (accelerometer case) the dynamic component is
    vectors - gravity; gyroscope vectors are projected as-is. Accepts a
    single (3,) vector or an (N, 3) stack; returns scalars or (N,) arrays.
    """
    d = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    single = np.asarray(vectors).ndim == 1
    v = gravity.vector
    vv = float(v @ v)
    if vv <= GRAVITY_NORM_FLOOR**2:
        raise DegenerateGravity("gravity vector too small to project onto")
    if subtract_gravity:
        d = d - v
    coef = (d @ v) / vv
    p = coef[:, None] * v
    h = d - p
    vert = np.abs(coef) * np.sqrt(vv)
    horiz = np.linalg.norm(h, axis=1)
    if single:
        return float(vert[0]), float(horiz[0])
    return vert, horiz


def align_recording(
    filtered: Recording, window_seconds: float = WINDOW_SECONDS
) -> AlignedSeries:
    """Per-interval gravity estimation + per-sample decomposition.

    The recording is partitioned into consecutive non-overlapping intervals
    of window_seconds; a tail shorter than one interval is dropped.
    """
    n_per = int(round(window_seconds * filtered.sample_rate))
    n_int = len(filtered) // n_per
    if n_int < 1:
        raise WindowTooShort(
            f"recording of {len(filtered)} samples shorter than one "
            f"{window_seconds} s interval ({n_per} samples)"
        )
    n_used = n_int * n_per
    out = np.empty((n_used, 4))
    for i in range(n_int):
        lo, hi = i * n_per, (i + 1) * n_per
        try:
            grav = estimate_gravity(filtered.accel[lo:hi])
            va, ha = decompose(filtered.accel[lo:hi], grav, subtract_gravity=True)
            vg, hg = decompose(filtered.gyro[lo:hi], grav, subtract_gravity=False)
        except (EmptyWindow, DegenerateGravity) as exc:
            exc.args = (f"interval {i}: {exc}",)
            raise
        out[lo:hi, 0] = va
        out[lo:hi, 1] = ha
        out[lo:hi, 2] = vg
        out[lo:hi, 3] = hg
    return AlignedSeries(
        t_ns=filtered.t_ns[:n_used],
        values=out,
        window_seconds=window_seconds,
        sample_rate=filtered.sample_rate,
        subject_id=filtered.subject_id,
        true_speed=filtered.true_speed,
    )
