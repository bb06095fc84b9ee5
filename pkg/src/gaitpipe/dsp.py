"""Spectral analysis and FIR low-pass denoising.

welch_psd averages Hann-windowed overlapped periodograms with density
scaling (unit^2/Hz). design_lowpass builds a linear-phase windowed-sinc
(Hamming) filter normalized to unit DC gain; apply_filter runs it with
symmetric edge padding and group-delay compensation so the output stays
phase-aligned with the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import Recording
from .errors import EvenTapCount, InvalidCutoff, InvalidOverlap, SignalTooShort


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided power spectral density, freqs ascending from 0 to Nyquist."""

    freqs: np.ndarray
    power: np.ndarray
    window_seconds: float
    overlap_fraction: float

    def __post_init__(self):
        if len(self.freqs) != len(self.power):
            raise ValueError("freqs and power must have equal length")
        if self.freqs[0] != 0.0:
            raise ValueError("first frequency bin must be 0 Hz")
        if np.any(self.power < 0):
            raise ValueError("power must be non-negative")


@dataclass(frozen=True)
class FirFilter:
    """Symmetric FIR taps with unit DC gain (linear phase)."""

    taps: np.ndarray
    cutoff_hz: float
    sample_rate_hz: float

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if len(taps) % 2 != 1:
            raise EvenTapCount(f"tap count must be odd, got {len(taps)}")
        if abs(taps.sum() - 1.0) > 1e-6:
            raise ValueError("taps must sum to 1 (unit DC gain)")
        if np.max(np.abs(taps - taps[::-1])) > 1e-12:
            raise ValueError("taps must be symmetric about the center")
        object.__setattr__(self, "taps", taps)

    def __len__(self):
        return len(self.taps)

    def gain_at(self, freq_hz: float) -> float:
        """Magnitude of the frequency response at a single frequency."""
        k = np.arange(len(self.taps))
        w = 2.0 * np.pi * freq_hz / self.sample_rate_hz
        return abs(np.sum(self.taps * np.exp(-1j * w * k)))


def welch_psd(
    signal: np.ndarray,
    sample_rate_hz: float,
    window_seconds: float = 1.0,
    overlap_fraction: float = 0.5,
) -> PsdEstimate:
    """Averaged Hann-windowed periodogram (one-sided, density scaling)."""
    x = np.asarray(signal, dtype=np.float64)
    if not 0.0 <= overlap_fraction < 1.0:
        raise InvalidOverlap(f"overlap must be in [0, 1), got {overlap_fraction}")
    nper = int(round(window_seconds * sample_rate_hz))
    if nper < 2:
        raise InvalidOverlap("window too short for the sample rate")
    if len(x) < nper:
        raise SignalTooShort(
            f"need at least {nper} samples ({window_seconds} s at "
            f"{sample_rate_hz} Hz), got {len(x)}"
        )
    step = max(1, nper - int(round(overlap_fraction * nper)))
    # periodic Hann window, as conventional for spectral averaging
    win = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(nper) / nper))
    scale = 1.0 / (sample_rate_hz * np.sum(win**2))

    starts = range(0, len(x) - nper + 1, step)
    acc = np.zeros(nper // 2 + 1)
    count = 0
    for s in starts:
        seg = x[s : s + nper]
        # window the fluctuation only; re-insert the segment mean as a pure
        # DC line (coherent gain), so a constant signal is DC-bin only
        mu = seg.mean()
        spec = np.fft.rfft((seg - mu) * win)
        spec[0] += mu * win.sum()
        acc += (spec.real**2 + spec.imag**2) * scale
        count += 1
    power = acc / count
    # one-sided: double everything except DC (and Nyquist when nper is even)
    power[1:] *= 2.0
    if nper % 2 == 0:
        power[-1] /= 2.0
    freqs = np.fft.rfftfreq(nper, d=1.0 / sample_rate_hz)
    return PsdEstimate(freqs, power, window_seconds, overlap_fraction)


def design_lowpass(
    cutoff_hz: float, sample_rate_hz: float, num_taps: int = 65
) -> FirFilter:
    """Windowed-sinc (Hamming) low-pass, normalized to unit DC gain."""
    if not 0.0 < cutoff_hz < sample_rate_hz / 2.0:
        raise InvalidCutoff(
            f"cutoff must be in (0, {sample_rate_hz / 2.0}) Hz (Nyquist bound), "
            f"got {cutoff_hz}"
        )
    if num_taps < 3 or num_taps % 2 != 1:
        raise EvenTapCount(f"num_taps must be odd and >= 3, got {num_taps}")
    m = num_taps // 2
    k = np.arange(num_taps) - m
    fc = cutoff_hz / sample_rate_hz
    taps = 2.0 * fc * np.sinc(2.0 * fc * k)
    taps *= np.hamming(num_taps)
    taps /= taps.sum()
    return FirFilter(taps, cutoff_hz, sample_rate_hz)


def apply_filter(filt: FirFilter, signal: np.ndarray) -> np.ndarray:
    """Zero-delay filtering: symmetric padding, same-length output."""
    x = np.asarray(signal, dtype=np.float64)
    n = len(filt)
    if len(x) < n:
        raise SignalTooShort(f"signal length {len(x)} < {n} taps")
    half = n // 2
    padded = np.pad(x, half, mode="symmetric")
    return np.convolve(padded, filt.taps, mode="valid")


def filter_recording(recording: Recording, filt: FirFilter) -> Recording:
    """Apply the FIR filter to all six sensor channels of a recording."""
    accel = np.column_stack(
        [apply_filter(filt, recording.accel[:, i]) for i in range(3)]
    )
    gyro = np.column_stack(
        [apply_filter(filt, recording.gyro[:, i]) for i in range(3)]
    )
    return recording.with_sensors(accel, gyro)
