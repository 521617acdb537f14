"""Anomaly detection toolkit. Scores are oriented so that larger means more anomalous."""

from ._core import (
    AnoscopeError,
    Model,
    auroc,
    average_precision,
    bench_toy,
    calibrate_threshold,
    evaluate,
    fit,
    kde_heatmaps,
    load,
    read_csv,
    two_moons,
    uniform_anomalies,
)

__all__ = [
    "AnoscopeError",
    "Model",
    "auroc",
    "average_precision",
    "bench_toy",
    "calibrate_threshold",
    "evaluate",
    "fit",
    "kde_heatmaps",
    "load",
    "read_csv",
    "two_moons",
    "uniform_anomalies",
]
