"""Core sensor/session types and IMU log ingestion.

A recording is array-backed (timestamps in integer nanoseconds, accel and
gyro as (N, 3) float arrays) so downstream signal processing stays
vectorized; individual readings are exposed as ImuSample on demand.
Internal speed unit is m/s everywhere; mph labels are converted once at
ingestion.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    BadManifest,
    EmptyFile,
    IrregularSampling,
    MalformedRow,
    NegativeSpeed,
    NonMonotoneTimestamp,
)

MPH_TO_MPS = 0.44704

CSV_HEADER = ("t_ns", "ax", "ay", "az", "gx", "gy", "gz")

#: Prediction / gravity-estimation window length in seconds.
WINDOW_SECONDS = 2.0


@dataclass(frozen=True)
class ImuSample:
    """One timestamped 6-axis reading: acceleration m/s^2, angular rate rad/s."""

    t: int
    ax: float
    ay: float
    az: float
    gx: float
    gy: float
    gz: float

    def __post_init__(self):
        vals = (self.ax, self.ay, self.az, self.gx, self.gy, self.gz)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("ImuSample fields must be finite")


@dataclass(frozen=True)
class Recording:
    """An ordered 6-axis IMU stream with optional ground-truth speed.

    true_speed is in m/s and may be None for prediction-only input.
    Timestamps are integer nanoseconds, strictly increasing.
    """

    subject_id: str
    true_speed: float | None
    sample_rate: float
    t_ns: np.ndarray
    accel: np.ndarray
    gyro: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_ns, dtype=np.int64)
        a = np.asarray(self.accel, dtype=np.float64)
        g = np.asarray(self.gyro, dtype=np.float64)
        n = len(t)
        if n == 0:
            raise EmptyFile("recording has no samples")
        if a.shape != (n, 3) or g.shape != (n, 3):
            raise ValueError("accel/gyro must be (N, 3) arrays matching t_ns")
        if not (np.isfinite(a).all() and np.isfinite(g).all()):
            raise ValueError("non-finite sensor values in recording")
        if n > 1:
            gaps = np.diff(t)
            if np.any(gaps <= 0):
                bad = int(np.argmax(gaps <= 0)) + 1
                raise NonMonotoneTimestamp(bad + 1)
            nominal = 1e9 / self.sample_rate
            med = float(np.median(gaps))
            if abs(med - nominal) > 0.2 * nominal:
                raise IrregularSampling(
                    f"median gap {med:.0f} ns deviates more than 20% from "
                    f"nominal {nominal:.0f} ns at {self.sample_rate} Hz"
                )
        if self.true_speed is not None and not self.true_speed > 0:
            raise NegativeSpeed(f"true_speed must be > 0, got {self.true_speed}")
        object.__setattr__(self, "t_ns", t)
        object.__setattr__(self, "accel", a)
        object.__setattr__(self, "gyro", g)

    def __len__(self):
        return len(self.t_ns)

    @property
    def duration_seconds(self) -> float:
        return len(self) / self.sample_rate

    def sample(self, i: int) -> ImuSample:
        return ImuSample(
            int(self.t_ns[i]),
            *(float(v) for v in self.accel[i]),
            *(float(v) for v in self.gyro[i]),
        )

    def samples(self):
        """Iterate readings as ImuSample objects."""
        for i in range(len(self)):
            yield self.sample(i)

    def with_sensors(self, accel: np.ndarray, gyro: np.ndarray) -> "Recording":
        """Same metadata and timestamps, replaced sensor streams."""
        return replace(self, accel=accel, gyro=gyro)

    def with_label(self, subject_id: str, true_speed: float | None) -> "Recording":
        return replace(self, subject_id=subject_id, true_speed=true_speed)


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    subject_id: str
    speed: float
    unit: str

    def speed_mps(self) -> float:
        if self.unit == "mph":
            return mph_to_mps(self.speed)
        return self.speed


@dataclass(frozen=True)
class SessionManifest:
    """List of (file path, subject, speed label, unit) entries.

    Relative paths are resolved against base_dir (the manifest's directory).
    """

    entries: tuple[ManifestEntry, ...]
    base_dir: str = "."

    def resolve(self, entry: ManifestEntry) -> str:
        if os.path.isabs(entry.path):
            return entry.path
        return os.path.join(self.base_dir, entry.path)


def mph_to_mps(v: float) -> float:
    """Convert speed in mph to m/s (exact factor 0.44704)."""
    if v < 0:
        raise NegativeSpeed(f"speed must be >= 0, got {v}")
    return v * MPH_TO_MPS


def _infer_sample_rate(t_ns: np.ndarray) -> float:
    if len(t_ns) < 2:
        return 100.0
    med = float(np.median(np.diff(t_ns)))
    return 1e9 / med


def parse_imu_csv(path: str) -> Recording:
    """Parse a `t_ns,ax,ay,az,gx,gy,gz` CSV into an unlabeled Recording.

    Rows with non-finite or unparseable values raise MalformedRow with the
    offending line number; out-of-order timestamps raise NonMonotoneTimestamp.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyFile(f"{path}: empty file")
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise MalformedRow(1, f"expected header {','.join(CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 7:
                raise MalformedRow(lineno, f"expected 7 fields, got {len(row)}")
            try:
                t = int(row[0])
                vals = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise MalformedRow(lineno, str(exc)) from exc
            if not all(math.isfinite(v) for v in vals):
                raise MalformedRow(lineno, "non-finite sensor value")
            if rows and t <= rows[-1][1]:
                raise NonMonotoneTimestamp(lineno)
            rows.append((lineno, t, vals))
    if not rows:
        raise EmptyFile(f"{path}: no data rows")
    t_ns = np.array([r[1] for r in rows], dtype=np.int64)
    data = np.array([r[2] for r in rows], dtype=np.float64)
    return Recording(
        subject_id="",
        true_speed=None,
        sample_rate=_infer_sample_rate(t_ns),
        t_ns=t_ns,
        accel=data[:, 0:3],
        gyro=data[:, 3:6],
    )


def write_imu_csv(recording: Recording, path: str) -> None:
    """Write a Recording back to the standard CSV format (round-trip exact)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for i in range(len(recording)):
            writer.writerow(
                [int(recording.t_ns[i])]
                + [repr(float(v)) for v in recording.accel[i]]
                + [repr(float(v)) for v in recording.gyro[i]]
            )


def parse_manifest(path: str) -> SessionManifest:
    """Parse a `path,subject_id,speed,unit` session manifest."""
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if row[0].strip() == "path":  # optional header
                continue
            if len(row) != 4:
                raise BadManifest(f"{path}:{lineno}: expected 4 fields")
            fpath, subject, speed_s, unit = (v.strip() for v in row)
            if unit not in ("mph", "mps"):
                raise BadManifest(f"{path}:{lineno}: unit must be mph or mps")
            try:
                speed = float(speed_s)
            except ValueError as exc:
                raise BadManifest(f"{path}:{lineno}: bad speed {speed_s!r}") from exc
            entries.append(ManifestEntry(fpath, subject, speed, unit))
    return SessionManifest(tuple(entries), base_dir=os.path.dirname(path) or ".")


def write_manifest(manifest: SessionManifest, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for e in manifest.entries:
            writer.writerow([e.path, e.subject_id, repr(e.speed), e.unit])


def load_session(manifest: SessionManifest) -> list[Recording]:
    """Load every manifest entry; speeds are normalized to m/s.

    Parse errors are re-raised with the offending file path in the message.
    """
    recordings = []
    for entry in manifest.entries:
        full = manifest.resolve(entry)
        if not os.path.exists(full):
            raise BadManifest(f"manifest references missing file: {full}")
        try:
            rec = parse_imu_csv(full)
        except (MalformedRow, NonMonotoneTimestamp) as exc:
            exc.args = (f"{full}: {exc}",)
            raise
        except (EmptyFile, IrregularSampling) as exc:
            raise type(exc)(f"{full}: {exc}") from exc
        recordings.append(rec.with_label(entry.subject_id, entry.speed_mps()))
    return recordings
