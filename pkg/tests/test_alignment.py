import numpy as np
import pytest

from conftest import make_recording
from gaitpipe.alignment import (
    GravityEstimate,
    align_recording,
    decompose,
    estimate_gravity,
)
from gaitpipe.errors import DegenerateGravity, EmptyWindow, WindowTooShort
from gaitpipe.synthgait import GaitParams, generate_recording, random_rotation


def test_gravity_constant_samples():
    g = estimate_gravity(np.tile([0.0, 0.0, 9.81], (10, 1)))
    assert (g.vx, g.vy, g.vz) == (0.0, 0.0, 9.81)


def test_gravity_symmetric_cancellation():
    samples = np.array([
        [1.0, 0.0, 9.81],
        [-1.0, 0.0, 9.81],
        [0.0, 0.0, 9.81],
    ])
    g = estimate_gravity(samples)
    assert g.vx == pytest.approx(0.0)
    assert g.vz == pytest.approx(9.81)


def test_gravity_noise_standard_error():
    """sigma/sqrt(N) = 0.1/sqrt(200) ~ 0.007 per axis; 0.03 is > 4 SE."""
    rng = np.random.default_rng(11)
    samples = np.array([0.0, 0.0, 9.81]) + rng.normal(0, 0.1, (200, 3))
    g = estimate_gravity(samples)
    assert np.linalg.norm(g.vector - [0, 0, 9.81]) < 0.03


def test_gravity_errors():
    with pytest.raises(EmptyWindow):
        estimate_gravity(np.empty((0, 3)))
    with pytest.raises(DegenerateGravity):
        estimate_gravity(np.full((4, 3), 1e-9))


def test_decompose_pure_gravity():
    g = GravityEstimate(0.0, 0.0, 9.81)
    assert decompose(np.array([0.0, 0.0, 9.81]), g) == (0.0, 0.0)


def test_decompose_axis_aligned():
    g = GravityEstimate(0.0, 0.0, 9.81)
    vert, horiz = decompose(np.array([0.0, 0.0, 12.81]), g)
    assert vert == pytest.approx(3.0)
    assert horiz == pytest.approx(0.0, abs=1e-12)


def test_decompose_orthogonal_345():
    g = GravityEstimate(0.0, 0.0, 9.81)
    vert, horiz = decompose(np.array([3.0, 4.0, 9.81]), g)
    assert vert == pytest.approx(0.0, abs=1e-12)
    assert horiz == pytest.approx(5.0)


def test_decompose_gyro_no_subtraction():
    g = GravityEstimate(0.0, 0.0, 9.81)
    vert, horiz = decompose(np.array([0.0, 0.0, 2.0]), g, subtract_gravity=False)
    assert vert == pytest.approx(2.0)
    assert horiz == pytest.approx(0.0, abs=1e-12)


def test_decompose_degenerate():
    with pytest.raises(DegenerateGravity):
        decompose(np.array([1.0, 0, 0]), GravityEstimate(0.0, 0.0, 0.0))


def test_decompose_pythagoras_and_orthogonality():
    rng = np.random.default_rng(5)
    g_vec = rng.normal(0, 3, 3) + [0, 0, 9.81]
    g = GravityEstimate(*g_vec)
    vecs = rng.normal(0, 2, (50, 3))
    vert, horiz = decompose(vecs, g, subtract_gravity=True)
    d = vecs - g.vector
    assert np.allclose(vert**2 + horiz**2, np.sum(d**2, axis=1), rtol=1e-9)
    # reconstruct p and h and check orthogonality
    coef = (d @ g.vector) / (g.vector @ g.vector)
    p = coef[:, None] * g.vector
    h = d - p
    dots = np.abs(np.sum(p * h, axis=1))
    bound = 1e-9 * np.linalg.norm(p, axis=1) * np.linalg.norm(h, axis=1) + 1e-12
    assert np.all(dots <= bound)


def test_align_static_recording(static_recording):
    aligned = align_recording(static_recording)
    assert len(aligned) == 400
    assert np.allclose(aligned.values, 0.0, atol=1e-12)


def test_align_too_short():
    rec = make_recording(np.tile([0, 0, 9.81], (100, 1)), np.zeros((100, 3)))
    with pytest.raises(WindowTooShort):
        align_recording(rec, window_seconds=2.0)


def test_align_drops_partial_tail():
    rec = make_recording(np.tile([0, 0, 9.81], (500, 1)), np.zeros((500, 3)))
    aligned = align_recording(rec, window_seconds=2.0)
    assert len(aligned) == 400  # 2 full 2 s intervals at 100 Hz


def test_align_rotation_invariance():
    """Rotating every accel and gyro vector leaves the output unchanged."""
    params = GaitParams(speed=1.0, accel_noise=0.0, gyro_noise=0.0)
    base = generate_recording(params, 8.0, seed=3, rotation=np.eye(3))
    aligned_base = align_recording(base)
    rng = np.random.default_rng(99)
    for _ in range(5):
        rot = random_rotation(rng)
        rec = make_recording(base.accel @ rot.T, base.gyro @ rot.T)
        aligned = align_recording(rec)
        assert np.max(np.abs(aligned.values - aligned_base.values)) < 1e-9


def test_align_scaling_homogeneity():
    params = GaitParams(speed=1.2, accel_noise=0.0, gyro_noise=0.0)
    rec = generate_recording(params, 6.0, seed=8)
    c = 2.75
    scaled = make_recording(rec.accel * c, rec.gyro)
    a1 = align_recording(rec)
    a2 = align_recording(scaled)
    assert np.allclose(a2.values[:, :2], c * a1.values[:, :2], rtol=1e-9, atol=1e-12)


def test_align_vertical_sine_amplitude():
    """Known vertical sinusoid on top of gravity shows up in va at its amplitude."""
    from gaitpipe.dsp import design_lowpass, filter_recording

    n = 800
    t = np.arange(n) / 100.0
    amp = 2.0
    accel = np.tile([0.0, 0.0, 9.81], (n, 1))
    accel[:, 2] += amp * np.sin(2 * np.pi * 4.0 * t)  # 8 cycles per 2 s window
    rec = make_recording(accel, np.zeros((n, 3)))
    fir = design_lowpass(15.0, 100.0)
    aligned = align_recording(filter_recording(rec, fir))
    va = aligned.values[:, 0][100:-100]  # interior, away from padding edges
    assert np.max(va) == pytest.approx(amp, rel=0.02)
