"""Figure rendering for emitted reports.

Each CLI report path writes PNG figures next to its CSV output.  The
statistics modules stay figure-free; everything here consumes their
report objects.  Figures carry the run stamp (config hash + seed) in
the corner so every artifact is traceable.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .adequacy import LoleReport
from .validation import EcdfReport, PValueCurve


def _stamp(fig, run_stamp: str | None):
    if run_stamp:
        fig.text(0.99, 0.01, run_stamp, ha="right", va="bottom",
                 fontsize=6, color="0.5")


def pvalue_curve_figure(curves: list[PValueCurve], path, title="",
                        run_stamp: str | None = None):
    """Cumulative p-value curves against the uniform diagonal."""
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot([0, 1], [0, 1], "k--", lw=1, label="uniform")
    for curve in curves:
        n = curve.p_values.size
        ax.step(curve.p_values, np.arange(1, n + 1) / n, where="post",
                lw=1, label=curve.label or None)
    ax.set_xlabel("p-value")
    ax.set_ylabel("cumulative fraction")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    if title:
        ax.set_title(title)
    if len(curves) <= 12:
        ax.legend(fontsize=7, loc="lower right")
    _stamp(fig, run_stamp)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def ecdf_figure(report: EcdfReport, path, title="reconstruction errors",
                run_stamp: str | None = None):
    """Cumulative distributions of reconstruction errors per population."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for label, errors in report.populations.items():
        if errors.size == 0:
            continue
        n = errors.size
        ax.step(errors, np.arange(1, n + 1) / n, where="post", lw=1.2, label=label)
    ax.set_xlabel("reconstruction error")
    ax.set_ylabel("cumulative fraction")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _stamp(fig, run_stamp)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def lole_figure(report: LoleReport, path, run_stamp: str | None = None):
    """Per-area LOLE bars with Monte Carlo standard-error whiskers."""
    fig, ax = plt.subplots(figsize=(max(4, 0.5 * len(report.areas) + 2), 4))
    pos = np.arange(len(report.areas))
    ax.bar(pos, report.lole, yerr=report.std_error, capsize=3, color="#4878d0")
    ax.set_xticks(pos)
    ax.set_xticklabels(report.areas, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("LOLE [h/y]")
    ax.set_title(f"LOLE, {report.samples} samples")
    _stamp(fig, run_stamp)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def loss_trace_figure(trace: np.ndarray, path, window: int = 500,
                      run_stamp: str | None = None):
    """Training loss per iteration plus a moving average."""
    trace = np.asarray(trace, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(trace, lw=0.4, alpha=0.5, label="loss")
    if trace.size >= window:
        kernel = np.ones(window) / window
        smooth = np.convolve(trace, kernel, mode="valid")
        ax.plot(np.arange(window - 1, trace.size), smooth, lw=1.5,
                label=f"{window}-iteration mean")
    ax.set_xlabel("iteration")
    ax.set_ylabel("batch loss")
    ax.legend(fontsize=8)
    _stamp(fig, run_stamp)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
