import numpy as np
import pytest

from gaitpipe.errors import GaitPipeError, InsufficientImages, WindowTooShort
from gaitpipe.imaging import ChannelSet, fit_normalizer
from gaitpipe.net import load_model, save_model
from gaitpipe.pipeline import (
    EvaluationReport,
    PipelineConfig,
    run_prediction,
    run_training,
    split_windows,
)
from gaitpipe.reports import read_report, write_report
from gaitpipe.synthgait import GaitParams, generate_cohort, generate_recording

FAST = PipelineConfig(epochs=3, seed=0)


@pytest.fixture(scope="module")
def small_cohort():
    return generate_cohort(2, [0.6, 1.2], 0.5, seed=11)  # 4 recordings x 30 s


@pytest.fixture(scope="module")
def trained(small_cohort):
    return run_training(small_cohort, ChannelSet.BOTH, None, FAST)


def test_run_training_report_shape(trained, small_cohort):
    model, report, history = trained
    assert len(history) == FAST.epochs
    assert set(report.per_subject_rmse) == {"S01", "S02"}
    assert report.metadata["channels"] == "both"
    assert report.metadata["diverged"] == "false"
    # 30 s -> 15 windows, 11 train (ceil .7*15) -> eval 4 per recording
    assert int(report.metadata["eval_images"]) == 16
    # train: sliding 1 s stride over 22 s span: 21 per recording
    assert int(report.metadata["train_images"]) == 84
    assert report.aggregate_rmse == pytest.approx(report.recompute_rmse(), abs=1e-12)


def test_run_training_deterministic(small_cohort, tmp_path):
    out = []
    for tag in ("a", "b"):
        model, report, _ = run_training(small_cohort, ChannelSet.BOTH, None, FAST)
        mpath = str(tmp_path / f"model_{tag}.txt")
        rpath = str(tmp_path / f"report_{tag}.txt")
        save_model(model, mpath)
        write_report(report, rpath)
        out.append((open(mpath, "rb").read(), open(rpath, "rb").read()))
    assert out[0] == out[1]  # byte-identical model and report


def test_run_training_m_budget(small_cohort):
    _, report, _ = run_training(small_cohort, ChannelSet.BOTH, 20, FAST)
    assert report.metadata["m"] == "20"
    assert int(report.metadata["train_images"]) == 20
    with pytest.raises(InsufficientImages):
        run_training(small_cohort, ChannelSet.BOTH, 10_000, FAST)


def test_run_prediction_counts(trained):
    model, _, _ = trained
    rec = generate_recording(GaitParams(speed=1.0), 10.0, seed=21)
    preds = run_prediction(model, rec)
    assert len(preds) == 5  # non-overlapping 2 s windows in 10 s
    starts = [p[0] for p in preds]
    assert starts == sorted(starts)
    for _start, speed in preds:
        assert np.isfinite(speed)


def test_run_prediction_too_short(trained):
    model, _, _ = trained
    from conftest import make_recording

    short = make_recording(
        np.tile([0.0, 0.0, 9.81], (190, 1)), np.zeros((190, 3)), speed=1.0
    )
    with pytest.raises(WindowTooShort):
        run_prediction(model, short)


def test_saved_model_predicts_identically(trained, tmp_path):
    model, _, _ = trained
    rec = generate_recording(GaitParams(speed=0.9), 8.0, seed=23)
    path = str(tmp_path / "model.txt")
    save_model(model, path)
    online = run_prediction(model, rec)
    offline = run_prediction(load_model(path), rec)
    assert [s for s, _ in online] == [s for s, _ in offline]
    assert np.max(np.abs(np.array([p for _, p in online]) -
                         np.array([p for _, p in offline]))) < 1e-9


def test_no_time_overlap_between_train_and_eval(small_cohort):
    """Leakage audit: every train window's time interval is disjoint from
    every eval window's interval, per recording."""
    win_ns = int(FAST.window_seconds * 1e9)
    train_per_rec, eval_per_rec = split_windows(small_cohort, FAST, ChannelSet.BOTH)
    for train_imgs, eval_imgs in zip(train_per_rec, eval_per_rec):
        for tr in train_imgs:
            for ev in eval_imgs:
                assert (
                    tr.start_t_ns + win_ns <= ev.start_t_ns
                    or ev.start_t_ns + win_ns <= tr.start_t_ns
                )


def test_normalizer_uses_training_images_only(small_cohort, trained):
    model, _, _ = trained
    train_per_rec, _ = split_windows(small_cohort, FAST, ChannelSet.BOTH)
    refit = fit_normalizer([im for imgs in train_per_rec for im in imgs])
    assert np.allclose(model.normalizer.mean, refit.mean, atol=1e-12)
    assert np.allclose(model.normalizer.std, refit.std, atol=1e-12)


def test_report_round_trip(trained, tmp_path):
    _, report, _ = trained
    path = str(tmp_path / "report.txt")
    write_report(report, path)
    back = read_report(path)
    assert back.aggregate_rmse == report.aggregate_rmse
    assert back.per_subject_rmse == report.per_subject_rmse
    assert back.pairs == report.pairs
    assert back.metadata == report.metadata


def test_report_recompute_matches(trained):
    _, report, _ = trained
    assert abs(report.recompute_rmse() - report.aggregate_rmse) < 1e-12


def test_read_report_malformed(tmp_path):
    path = str(tmp_path / "bad.txt")
    open(path, "w").write("just nonsense\n")
    with pytest.raises(GaitPipeError):
        read_report(path)


def test_config_hash_sensitivity():
    a = PipelineConfig(seed=0)
    b = PipelineConfig(seed=1)
    assert a.config_hash() != b.config_hash()
    assert a.config_hash() == PipelineConfig(seed=0).config_hash()


def test_report_sorted_subjects(trained):
    _, report, _ = trained
    assert list(report.per_subject_rmse) == sorted(report.per_subject_rmse)


def test_empty_report_rmse_nan():
    report = EvaluationReport({}, float("nan"), [])
    assert report.pairs == []
