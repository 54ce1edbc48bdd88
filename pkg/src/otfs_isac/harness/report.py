"""CSV and figure emission for sweep and tracking results.

The CSV writer is byte-deterministic: rows are sorted by their scenario
coordinates and floats are printed with a fixed %.12g format, so identical
(config, seed) pairs produce identical files.
"""

from __future__ import annotations

import csv
import subprocess
from dataclasses import fields
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .sweep import TrialResult  # noqa: E402

CSV_COLUMNS = [
    "figure", "objective", "variant", "snr_db", "e", "speed", "trial",
    "r1", "r2", "w1", "w2", "rate_metric", "feasible",
    "tau_hat", "nu_hat", "e_hat", "range_err_pct",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def emit_csv(results, path) -> None:
    """Write sweep results sorted by scenario coordinates."""
    if not results:
        raise ValueError("no results to write")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for res in sorted(results, key=TrialResult.sort_key):
            writer.writerow([_fmt(getattr(res, col)) for col in CSV_COLUMNS])


def emit_track_csv(points, path) -> None:
    """Write tracking records, one row per slot."""
    if not points:
        raise ValueError("no track points to write")
    cols = [f.name for f in fields(points[0])]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for p in points:
            writer.writerow([_fmt(getattr(p, name)) for name in cols])


def _mean_curve(rows, x_attr):
    """Mean rate_metric per x value; returns (xs, means)."""
    buckets: dict = {}
    for r in rows:
        buckets.setdefault(getattr(r, x_attr), []).append(r.rate_metric)
    xs = sorted(buckets)
    return np.array(xs), np.array([np.mean(buckets[x]) for x in xs])


def _plot_grouped(rows, x_attr, group_fn, xlabel, ylabel, title, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    groups = sorted({group_fn(r) for r in rows})
    for label in groups:
        xs, ys = _mean_curve([r for r in rows if group_fn(r) == label], x_attr)
        ax.plot(xs, ys, marker="o", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_tracking(points, path) -> None:
    """Ground-track overlay: true vs smoothed estimated trajectory."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot([p.x_true for p in points], [p.y_true for p in points],
             label="true")
    ax1.plot([p.x_smooth for p in points], [p.y_smooth for p in points],
             "--", label="estimated (smoothed)")
    ax1.set_xlabel("x (m)")
    ax1.set_ylabel("y (m)")
    ax1.set_title("ground track")
    ax1.legend()
    ax1.grid(True, alpha=0.4)
    ax2.plot([p.t for p in points], [p.err_pct_raw for p in points],
             label="raw")
    ax2.plot([p.t for p in points], [p.err_pct_smooth for p in points],
             label="smoothed")
    ax2.set_xlabel("time (s)")
    ax2.set_ylabel("range error (%)")
    ax2.set_title("range tracking error")
    ax2.legend()
    ax2.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def emit_plots(results, out_dir, track_points=None) -> list:
    """Render one vector image per figure present in the results."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    figure_numbers = sorted({r.figure for r in results})
    for fig_no in figure_numbers:
        rows = [r for r in results if r.figure == fig_no]
        path = out_dir / f"fig{fig_no}.svg"
        if fig_no in (5, 6, 0):
            _plot_grouped(rows, "snr_db", lambda r: r.variant, "SNR (dB)",
                          "mean rate (bits/s/Hz)",
                          "max-min rate vs SNR" if fig_no == 5
                          else "sum rate vs SNR", path)
        elif fig_no == 7:
            _plot_grouped(rows, "e", lambda r: f"{r.objective}-{r.variant}",
                          "NLOS strength e", "rate (bits/s/Hz)",
                          "closed-form bounds vs NLOS strength", path)
        elif fig_no == 8:
            _plot_grouped(rows, "e", lambda r: f"{r.objective}-{r.variant}",
                          "NLOS strength e", "mean rate (bits/s/Hz)",
                          "system comparison vs NLOS strength", path)
        elif fig_no == 9:
            _plot_grouped(rows, "speed", lambda r: f"{r.objective}-{r.variant}",
                          "speed (m/s)", "mean rate (bits/s/Hz)",
                          "rate vs user speed", path)
        else:
            continue
        written.append(path)
    if track_points:
        path = out_dir / "fig4.svg"
        plot_tracking(track_points, path)
        written.append(path)
    return written


def _version_string() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=10)
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    try:
        from importlib.metadata import version
        return version("otfs-isac")
    except Exception:
        return "unknown"


def write_manifest(cfg, path, figures=()) -> None:
    """Echo the effective configuration, seed and version for provenance."""
    lines = [f"version = {_version_string()}"]
    for name in ("seed", "trials", "out_dir", "carrier", "d1", "d2",
                 "uav_height", "speed_min", "speed_max", "g_tx", "g_rx",
                 "pt", "snr_db", "perfect_csi", "e", "nlos_count",
                 "doppler_fraction", "threshold_rel", "r1_min", "r2_min",
                 "guard", "t_otfs", "sweep_axis"):
        lines.append(f"{name} = {getattr(cfg, name)}")
    lines.append(f"frame = {cfg.frame.m}x{cfg.frame.n}"
                 f" @ {cfg.frame.frame_duration:.6g} s")
    lines.append(f"array = {cfg.array.nx}x{cfg.array.ny}")
    lines.append("sweep_values = "
                 + ",".join(f"{v:.12g}" for v in np.asarray(cfg.sweep_values)))
    lines.append("figures = " + ",".join(str(f) for f in figures))
    Path(path).write_text("\n".join(lines) + "\n")
