"""Evaluation metrics: MSE, Pearson correlation, IoU, and table aggregates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calibrate import DigitalSignal
from .errors import UndefinedCorrelationError
from .raster import BinaryMask


@dataclass(frozen=True)
class EvalReport:
    """Metrics for one prediction/reference pair."""

    mse: float
    pearson: float
    lag: int
    n_samples: int
    iou: float | None = None

    def __post_init__(self):
        if self.mse < 0:
            raise ValueError("mse must be >= 0")
        if not -1.0 <= self.pearson <= 1.0:
            raise ValueError("pearson must be in [-1, 1]")
        if self.iou is not None and not 0.0 <= self.iou <= 1.0:
            raise ValueError("iou must be in [0, 1]")


@dataclass(frozen=True)
class AggregateReport:
    """Table-style aggregate statistics for one group of reports."""

    group: str
    n: int
    mse_mean: float
    mse_std: float
    mse_max: float
    rho_mean: float
    rho_min: float
    rho_std: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("aggregate needs n >= 1")
        if self.mse_std < 0 or self.rho_std < 0:
            raise ValueError("std must be >= 0")


def _check_pair(pred: DigitalSignal, ref: DigitalSignal) -> None:
    if pred.n_samples != ref.n_samples:
        raise ValueError(f"length mismatch: {pred.n_samples} vs {ref.n_samples} (align/truncate first)")
    if pred.sampling_rate != ref.sampling_rate:
        raise ValueError(f"sampling rate mismatch: {pred.sampling_rate} vs {ref.sampling_rate}")


def mse(pred: DigitalSignal, ref: DigitalSignal) -> float:
    """Mean squared difference in mV^2 over equal-length signals."""
    _check_pair(pred, ref)
    diff = ref.samples - pred.samples
    return math.fsum(diff * diff) / ref.n_samples


def pearson(pred: DigitalSignal, ref: DigitalSignal) -> float:
    """Pearson correlation coefficient; undefined for constant inputs."""
    _check_pair(pred, ref)
    if pred.n_samples < 2:
        raise ValueError("pearson needs at least 2 samples")
    a = ref.samples - ref.samples.mean()
    b = pred.samples - pred.samples.mean()
    denom = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
    if denom == 0.0:
        raise UndefinedCorrelationError("correlation is undefined for a constant signal")
    return min(1.0, max(-1.0, float(np.dot(a, b)) / denom))


def iou(a: BinaryMask, b: BinaryMask) -> float:
    """Jaccard index of two masks; two empty masks agree perfectly (1.0)."""
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(f"mask dimensions differ: {a.pixels.shape} vs {b.pixels.shape}")
    union = int(np.count_nonzero(a.pixels | b.pixels))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(a.pixels & b.pixels)) / union


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def _population_std(values: list[float], mean: float) -> float:
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))


def aggregate(reports: list[EvalReport], group: str) -> AggregateReport:
    """Population mean/std of MSE and rho plus worst cases, per table row structure."""
    if not reports:
        raise ValueError("aggregate needs at least one report")
    mses = [r.mse for r in reports]
    rhos = [r.pearson for r in reports]
    mse_mean = _mean(mses)
    rho_mean = _mean(rhos)
    return AggregateReport(
        group=group,
        n=len(reports),
        mse_mean=mse_mean,
        mse_std=_population_std(mses, mse_mean),
        mse_max=max(mses),
        rho_mean=rho_mean,
        rho_min=min(rhos),
        rho_std=_population_std(rhos, rho_mean),
    )
