"""Command-line entry point exposing every pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error, 3 training divergence.
Every run logs its fully resolved configuration to stderr. Subcommands that
emit reports also render a PNG figure next to the delimited output (disable
with --no-figures). GAITPIPE_OUT_DIR sets the default output directory.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .alignment import CHANNEL_NAMES, align_recording
from .data_model import (
    ManifestEntry,
    SessionManifest,
    load_session,
    mph_to_mps,
    parse_imu_csv,
    parse_manifest,
    write_imu_csv,
    write_manifest,
)
from .dsp import design_lowpass, filter_recording, welch_psd
from .errors import Divergence, GaitPipeError
from .imaging import ChannelSet, build_dataset, save_images
from .net import load_model, save_model
from .pipeline import (
    PipelineConfig,
    evaluate_model,
    run_ablation,
    run_m_sweep,
    run_prediction,
    run_training,
)
from .synthgait import GaitParams, generate_cohort
from . import reports


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _out_dir(path: str | None) -> str:
    d = path or os.environ.get("GAITPIPE_OUT_DIR", ".")
    os.makedirs(d, exist_ok=True)
    return d


def _log_config(args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    for key, val in resolved.items():
        print(f"config {key}={val}", file=sys.stderr)


def _add_filter_flags(p):
    p.add_argument("--cutoff", type=float, default=15.0,
                   help="FIR low-pass cutoff in Hz (default: %(default)s)")
    p.add_argument("--taps", type=int, default=65,
                   help="FIR tap count, odd (default: %(default)s)")


def _add_train_flags(p):
    _add_filter_flags(p)
    p.add_argument("--window", type=float, default=2.0,
                   help="window length in seconds (default: %(default)s)")
    p.add_argument("--split", type=float, default=0.7,
                   help="train fraction of each recording (default: %(default)s)")
    p.add_argument("--overlap", type=float, default=0.5,
                   help="training window overlap fraction (default: %(default)s)")
    p.add_argument("--epochs", type=int, default=100,
                   help="training epochs (default: %(default)s)")
    p.add_argument("--batch", type=int, default=64,
                   help="mini-batch size (default: %(default)s)")
    p.add_argument("--lr", type=float, default=1e-3,
                   help="learning rate (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0,
                   help="RNG seed (default: %(default)s)")
    p.add_argument("--channels", choices=[c.value for c in ChannelSet],
                   default="both", help="sensor channel set (default: %(default)s)")


def _pipeline_config(args) -> PipelineConfig:
    if not 0.0 < args.split < 1.0:
        raise UsageError(f"--split must be in (0, 1), got {args.split}")
    if not 0.0 <= args.overlap < 1.0:
        raise UsageError(f"--overlap must be in [0, 1), got {args.overlap}")
    return PipelineConfig(
        window_seconds=args.window,
        cutoff_hz=args.cutoff,
        num_taps=args.taps,
        split_fraction=args.split,
        train_overlap=args.overlap,
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        seed=args.seed,
    )


def _check_cutoff(cutoff: float, rate: float):
    if not 0.0 < cutoff < rate / 2.0:
        raise UsageError(
            f"--cutoff {cutoff} Hz outside (0, {rate / 2.0}) Hz: cutoff must be "
            f"below the Nyquist frequency at {rate} Hz sampling"
        )


# --- subcommands ------------------------------------------------------------

def cmd_synth(args):
    speeds = [float(s) for s in args.speeds.split(",")]
    if args.unit == "mph":
        speeds_mps = [mph_to_mps(s) for s in speeds]
    else:
        speeds_mps = speeds
    base = GaitParams(
        speed=1.0, accel_noise=args.accel_noise, gyro_noise=args.gyro_noise
    )
    cohort = generate_cohort(
        args.subjects, speeds_mps, args.minutes, seed=args.seed,
        sample_rate_hz=args.rate, base_params=base,
    )
    out = _out_dir(args.out_dir)
    entries = []
    for rec in cohort:
        fname = f"{rec.subject_id}_{rec.true_speed:.3f}mps.csv"
        write_imu_csv(rec, os.path.join(out, fname))
        entries.append(ManifestEntry(fname, rec.subject_id, rec.true_speed, "mps"))
    manifest_path = os.path.join(out, "manifest.csv")
    write_manifest(SessionManifest(tuple(entries), out), manifest_path)
    print(manifest_path)
    return 0


def cmd_psd(args):
    rec = parse_imu_csv(args.input)
    channels = {
        "ax": rec.accel[:, 0], "ay": rec.accel[:, 1], "az": rec.accel[:, 2],
        "gx": rec.gyro[:, 0], "gy": rec.gyro[:, 1], "gz": rec.gyro[:, 2],
    }
    psd = welch_psd(channels[args.channel], rec.sample_rate,
                    args.window, args.overlap)
    reports.write_psd_csv(psd, args.out)
    if not args.no_figures:
        reports.render_psd_figure({args.channel: psd}, _fig_path(args.out))
    print(args.out)
    return 0


def cmd_filter(args):
    if args.rate is not None:
        _check_cutoff(args.cutoff, args.rate)
    if args.input is None or args.out is None:
        raise UsageError("--input and --out are required")
    rec = parse_imu_csv(args.input)
    rate = args.rate if args.rate is not None else rec.sample_rate
    _check_cutoff(args.cutoff, rate)
    fir = design_lowpass(args.cutoff, rate, args.taps)
    write_imu_csv(filter_recording(rec, fir), args.out)
    print(args.out)
    return 0


def cmd_align(args):
    rec = parse_imu_csv(args.input)
    _check_cutoff(args.cutoff, rec.sample_rate)
    fir = design_lowpass(args.cutoff, rec.sample_rate, args.taps)
    aligned = align_recording(filter_recording(rec, fir), args.window)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("t_ns," + ",".join(CHANNEL_NAMES) + "\n")
        for t, row in zip(aligned.t_ns, aligned.values):
            fh.write(f"{int(t)}," + ",".join(repr(float(v)) for v in row) + "\n")
    print(args.out)
    return 0


def cmd_make_images(args):
    manifest = parse_manifest(args.manifest)
    recordings = load_session(manifest)
    channels = ChannelSet(args.channels)
    images = build_dataset(
        recordings, channels, args.overlap, window_seconds=args.window
    )
    save_images(images, args.out, channels)
    print(args.out)
    return 0


def cmd_train(args):
    manifest = parse_manifest(args.manifest)
    config = _pipeline_config(args)
    channels = ChannelSet(args.channels)
    m = None if args.m in (None, "all") else int(args.m)
    model, report, _history = run_training(manifest, channels, m, config)
    save_model(model, args.out)
    if args.report:
        reports.write_report(report, args.report)
        if not args.no_figures:
            reports.render_per_subject_figure(report, _fig_path(args.report))
    print(f"model={args.out} aggregate_rmse_mps={report.aggregate_rmse:.17g}")
    if report.metadata.get("diverged") == "true":
        raise Divergence("training diverged; model holds last parameters")
    return 0


def cmd_predict(args):
    model = load_model(args.model)
    rec = parse_imu_csv(args.input)
    preds = run_prediction(model, rec)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("window_start_ns,pred_mps\n")
        for start_ns, pred in preds:
            fh.write(f"{start_ns},{pred:.17g}\n")
    print(args.out)
    return 0


def cmd_evaluate(args):
    model = load_model(args.model)
    recordings = load_session(parse_manifest(args.manifest))
    report = evaluate_model(model, recordings)
    reports.write_report(report, args.report)
    if not args.no_figures:
        reports.render_per_subject_figure(report, _fig_path(args.report))
    print(f"report={args.report} aggregate_rmse_mps={report.aggregate_rmse:.17g}")
    return 0


def cmd_ablate(args):
    manifest = parse_manifest(args.manifest)
    config = _pipeline_config(args)
    m = None if args.m in (None, "all") else int(args.m)
    results = run_ablation(manifest, config, m)
    out = _out_dir(args.out_dir)
    rows = []
    for channels, report in results.items():
        path = os.path.join(out, f"ablation_{channels.value}.report")
        reports.write_report(report, path)
        rows.append((channels.value, report.aggregate_rmse))
    table = os.path.join(out, "ablation.csv")
    reports.write_comparison(rows, table)
    if not args.no_figures:
        reports.render_ablation_figure(rows, os.path.join(out, "ablation.png"))
    print(table)
    return 0


def cmd_sweep_m(args):
    manifest = parse_manifest(args.manifest)
    config = _pipeline_config(args)
    m_values = [int(v) for v in args.m.split(",")]
    results = run_m_sweep(manifest, m_values, config, ChannelSet(args.channels))
    out = _out_dir(args.out_dir)
    series = []
    for m, report in results:
        reports.write_report(report, os.path.join(out, f"sweep_m{m}.report"))
        series.append((m, report.aggregate_rmse))
    table = os.path.join(out, "sweep.csv")
    with open(table, "w", encoding="utf-8") as fh:
        fh.write("m,rmse_mps\n")
        for m, rmse in series:
            fh.write(f"{m},{rmse:.17g}\n")
    if not args.no_figures:
        reports.render_sweep_figure(series, os.path.join(out, "sweep.png"))
    print(table)
    return 0


def _fig_path(csv_path: str) -> str:
    base, _ext = os.path.splitext(csv_path)
    return base + ".png"


def build_parser() -> _Parser:
    parser = _Parser(prog="gaitpipe",
                     description="IMU walking-speed estimation pipeline")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled cohort")
    p.add_argument("--out-dir", default=None,
                   help="output directory (default: GAITPIPE_OUT_DIR or .)")
    p.add_argument("--subjects", type=int, default=3,
                   help="number of subjects (default: %(default)s)")
    p.add_argument("--speeds", default="1,1.5,2,2.5,3",
                   help="comma-separated speeds (default: %(default)s)")
    p.add_argument("--unit", choices=["mph", "mps"], default="mph",
                   help="unit of --speeds (default: %(default)s)")
    p.add_argument("--minutes", type=float, default=2.0,
                   help="minutes per speed (default: %(default)s)")
    p.add_argument("--rate", type=float, default=100.0,
                   help="sample rate in Hz (default: %(default)s)")
    p.add_argument("--accel-noise", type=float, default=0.4,
                   help="accel noise sigma m/s^2 (default: %(default)s)")
    p.add_argument("--gyro-noise", type=float, default=0.15,
                   help="gyro noise sigma rad/s (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0,
                   help="RNG seed (default: %(default)s)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("psd", help="Welch PSD of one IMU channel")
    p.add_argument("--input", required=True, help="IMU CSV file")
    p.add_argument("--channel", choices=["ax", "ay", "az", "gx", "gy", "gz"],
                   default="az", help="channel to analyze (default: %(default)s)")
    p.add_argument("--window", type=float, default=1.0,
                   help="Welch window seconds (default: %(default)s)")
    p.add_argument("--overlap", type=float, default=0.5,
                   help="Welch overlap fraction (default: %(default)s)")
    p.add_argument("--out", required=True, help="output freq_hz,power CSV")
    p.add_argument("--no-figures", action="store_true",
                   help="skip PNG rendering")
    p.set_defaults(func=cmd_psd)

    p = sub.add_parser("filter", help="FIR low-pass all six channels")
    p.add_argument("--input", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--rate", type=float, default=None,
                   help="sample rate in Hz (default: inferred from input)")
    _add_filter_flags(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("align", help="orientation-independent channels CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    _add_filter_flags(p)
    p.add_argument("--window", type=float, default=2.0,
                   help="gravity interval seconds (default: %(default)s)")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("make-images", help="build a gait-image dataset file")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--channels", choices=[c.value for c in ChannelSet],
                   default="both", help="sensor set (default: %(default)s)")
    p.add_argument("--overlap", type=float, default=0.0,
                   help="window overlap fraction (default: %(default)s)")
    p.add_argument("--window", type=float, default=2.0,
                   help="window seconds (default: %(default)s)")
    p.set_defaults(func=cmd_make_images)

    p = sub.add_parser("train", help="train a model from a session manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--report", default=None, help="also write an evaluation report")
    p.add_argument("--m", default="all",
                   help="training image budget (default: %(default)s)")
    p.add_argument("--no-figures", action="store_true")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict speeds for one recording")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="evaluate a saved model on a manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="ACC / GYRO / BOTH sensor ablation")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--m", default="all")
    p.add_argument("--no-figures", action="store_true")
    _add_train_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("sweep-m", help="RMSE vs training image budget")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--m", required=True, help="comma-separated budgets")
    p.add_argument("--no-figures", action="store_true")
    _add_train_flags(p)
    p.set_defaults(func=cmd_sweep_m)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _log_config(args)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Divergence as exc:
        print(f"training divergence: {exc}", file=sys.stderr)
        return 3
    except (GaitPipeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
