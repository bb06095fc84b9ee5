"""Report files and the figures rendered next to them.

Report format: `key=value` header lines, then a CSV body
`subject_id,window_start_ns,true_mps,pred_mps`. Comparison tables are plain
CSV `arm,rmse_mps`. Each writer has a matching figure renderer (PNG via the
Agg backend) so experiment outputs are inspectable without extra tooling.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dsp import PsdEstimate
from .errors import GaitPipeError
from .pipeline import EvaluationReport

CSV_HEADER = "subject_id,window_start_ns,true_mps,pred_mps"


def write_report(report: EvaluationReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, val in sorted(report.metadata.items()):
            fh.write(f"{key}={val}\n")
        fh.write(f"aggregate_rmse_mps={report.aggregate_rmse:.17g}\n")
        for subject, val in report.per_subject_rmse.items():
            fh.write(f"rmse_mps[{subject}]={val:.17g}\n")
        fh.write(CSV_HEADER + "\n")
        for subject, start_ns, true, pred in report.pairs:
            fh.write(f"{subject},{start_ns},{true:.17g},{pred:.17g}\n")


def read_report(path: str) -> EvaluationReport:
    metadata: dict[str, str] = {}
    pairs = []
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    try:
        i = 0
        while i < len(lines) and lines[i] != CSV_HEADER:
            key, val = lines[i].split("=", 1)
            metadata[key] = val
            i += 1
        if i == len(lines):
            raise GaitPipeError(f"{path}: missing CSV header line")
        for line in lines[i + 1 :]:
            subject, start_s, true_s, pred_s = line.split(",")
            pairs.append((subject, int(start_s), float(true_s), float(pred_s)))
    except ValueError as exc:
        raise GaitPipeError(f"{path}: malformed report: {exc}") from exc
    per_subject = {
        k[len("rmse_mps[") : -1]: float(v)
        for k, v in metadata.items()
        if k.startswith("rmse_mps[")
    }
    aggregate = float(metadata.pop("aggregate_rmse_mps", "nan"))
    metadata = {k: v for k, v in metadata.items() if not k.startswith("rmse_mps[")}
    return EvaluationReport(per_subject, aggregate, pairs, metadata)


def write_comparison(rows: list[tuple[str, float]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("arm,rmse_mps\n")
        for arm, rmse in rows:
            fh.write(f"{arm},{rmse:.17g}\n")


def write_psd_csv(psd: PsdEstimate, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("freq_hz,power\n")
        for f, p in zip(psd.freqs, psd.power):
            fh.write(f"{f:.17g},{p:.17g}\n")


# --- figures ----------------------------------------------------------------

def render_per_subject_figure(report: EvaluationReport, path: str) -> None:
    """Bar chart of per-subject RMSE with the aggregate as a reference line."""
    subjects = list(report.per_subject_rmse)
    values = [report.per_subject_rmse[s] for s in subjects]
    fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(subjects) + 2), 3.2))
    ax.bar(subjects, values, color="tab:blue")
    ax.axhline(report.aggregate_rmse, color="tab:red", ls="--", lw=1,
               label=f"aggregate {report.aggregate_rmse:.3f} m/s")
    ax.set_ylabel("RMSE (m/s)")
    ax.set_xlabel("participant")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_ablation_figure(rows: list[tuple[str, float]], path: str) -> None:
    arms = [r[0] for r in rows]
    values = [r[1] for r in rows]
    fig, ax = plt.subplots(figsize=(4, 3.2))
    ax.bar(arms, values, color=["tab:orange", "tab:green", "tab:blue"][: len(arms)])
    ax.set_ylabel("RMSE (m/s)")
    ax.set_xlabel("sensor set")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep_figure(series: list[tuple[int, float]], path: str) -> None:
    ms = [s[0] for s in series]
    values = [s[1] for s in series]
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.plot(ms, values, "o-")
    ax.set_xlabel("training images M")
    ax.set_ylabel("RMSE (m/s)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_psd_figure(psds: dict[str, PsdEstimate], path: str) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for label, psd in psds.items():
        ax.semilogy(psd.freqs, np.maximum(psd.power, 1e-20), label=label)
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("power spectral density")
    if len(psds) > 1:
        ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
