"""Metrics emission: CSV rows per trial, JSON-lines with run metadata, per-tick traces.

All floats are written with a canonical 12-significant-digit format so a rerun
with the same seed produces byte-identical files.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

METRIC_COLUMNS = ("trial", "method", "task", "seed", "effort", "final_error", "success", "mean_beta")
SUMMARY_COLUMNS = ("method", "task", "runs", "mean_effort", "mean_final_error", "success_rate", "mean_beta")


def fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def write_metrics_csv(rows, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(METRIC_COLUMNS)
        for r in rows:
            w.writerow(
                [
                    r.trial, r.method, r.task, r.seed,
                    fmt(r.effort), fmt(r.final_error), fmt(r.success), fmt(r.mean_beta),
                ]
            )


def write_trials_jsonl(rows, path, calibration: dict | None = None, meta: dict | None = None):
    """One JSON object per trial, preceded by a header object with the
    normalization constants and any run metadata."""
    with open(path, "w") as f:
        header = {"type": "header", "no_assist_mean_time": calibration or {}}
        if meta:
            header.update(meta)
        f.write(json.dumps(header, sort_keys=True) + "\n")
        for r in rows:
            d = {
                "type": "trial",
                "trial": r.trial,
                "method": r.method,
                "task": r.task,
                "seed": r.seed,
                "effort": r.effort,
                "final_error": r.final_error,
                "success": r.success,
                "mean_beta": r.mean_beta,
                "bundle_version": r.bundle_version,
                "commanded_ticks": r.commanded_ticks,
                "total_ticks": r.total_ticks,
                "completion_time": r.completion_time,
            }
            f.write(json.dumps(d, sort_keys=True) + "\n")


def write_traces(records, out_dir):
    """Per-interaction tick traces: state, commands, and the arbitration weight."""
    os.makedirs(out_dir, exist_ok=True)
    for rec in records:
        path = os.path.join(out_dir, f"{rec.record_id}.csv")
        n = rec.steps[0].state.shape[0] if rec.steps else 0
        cols = ["tick"] + [f"s{i}" for i in range(n)] + [f"ah{i}" for i in range(n)] \
            + [f"ar{i}" for i in range(n)] + ["beta"]
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(cols)
            for s in rec.steps:
                w.writerow(
                    [s.tick]
                    + [fmt(float(v)) for v in s.state]
                    + [fmt(float(v)) for v in s.a_h]
                    + [fmt(float(v)) for v in s.a_r]
                    + [fmt(s.beta)]
                )


def summarize(rows):
    """Per (method, task) means over the raw rows."""
    groups = {}
    for r in rows:
        groups.setdefault((r.method, r.task), []).append(r)
    out = []
    for (method, task) in sorted(groups):
        rs = groups[(method, task)]
        out.append(
            {
                "method": method,
                "task": task,
                "runs": len(rs),
                "mean_effort": float(np.mean([r.effort for r in rs])),
                "mean_final_error": float(np.mean([r.final_error for r in rs])),
                "success_rate": float(np.mean([1.0 if r.success else 0.0 for r in rs])),
                "mean_beta": float(np.mean([r.mean_beta for r in rs])),
            }
        )
    return out


def write_summary_csv(rows, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(SUMMARY_COLUMNS)
        for s in summarize(rows):
            w.writerow(
                [
                    s["method"], s["task"], s["runs"],
                    fmt(s["mean_effort"]), fmt(s["mean_final_error"]),
                    fmt(s["success_rate"]), fmt(s["mean_beta"]),
                ]
            )


def write_curve_csv(curve, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["epoch", "loss"])
        for i, loss in enumerate(curve):
            w.writerow([i, fmt(float(loss))])


def emit_report(rows, records, out_dir, calibration=None, meta=None):
    """metrics.csv + trials.jsonl + summary.csv + traces/ under ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    write_metrics_csv(rows, os.path.join(out_dir, "metrics.csv"))
    write_trials_jsonl(rows, os.path.join(out_dir, "trials.jsonl"), calibration, meta)
    write_summary_csv(rows, os.path.join(out_dir, "summary.csv"))
    write_traces(records, os.path.join(out_dir, "traces"))
