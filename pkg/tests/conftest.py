import numpy as np
import pytest

from gaitpipe.data_model import Recording


@pytest.fixture
def static_recording():
    """4 s of a perfectly still device at 100 Hz, gravity on +z."""
    n = 400
    t_ns = (np.arange(n) * 10_000_000).astype(np.int64)
    accel = np.tile([0.0, 0.0, 9.81], (n, 1))
    gyro = np.zeros((n, 3))
    return Recording(
        subject_id="static",
        true_speed=None,
        sample_rate=100.0,
        t_ns=t_ns,
        accel=accel,
        gyro=gyro,
    )


def make_recording(accel, gyro, rate=100.0, speed=None, subject="test"):
    n = len(accel)
    t_ns = (np.arange(n) * round(1e9 / rate)).astype(np.int64)
    return Recording(
        subject_id=subject,
        true_speed=speed,
        sample_rate=rate,
        t_ns=t_ns,
        accel=np.asarray(accel, dtype=float),
        gyro=np.asarray(gyro, dtype=float),
    )
