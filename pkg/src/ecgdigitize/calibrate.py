"""Pixel traces to physical units, resampling, lag and baseline corrections.

Standard ECG paper: one large square is 0.2 s wide and 0.5 mV tall.  Image
rows grow downward, so voltage is the negated row coordinate; the absolute
zero level is arbitrary until the median baseline is removed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, CalibrationError
from .grid import GridGeometry
from .trace import PixelTrace

DEFAULT_SAMPLING_RATE_HZ = 100.0
DEFAULT_LAG_WINDOW = 10


@dataclass(frozen=True)
class CalibrationConstants:
    """Physical size of one large grid square."""

    mv_per_large_square: float = 0.5
    sec_per_large_square: float = 0.2

    def __post_init__(self):
        if self.mv_per_large_square <= 0 or self.sec_per_large_square <= 0:
            raise ValueError("calibration constants must be positive")


STANDARD_CALIBRATION = CalibrationConstants()


@dataclass(frozen=True, eq=False)
class DigitalSignal:
    """Uniformly sampled voltage series in millivolts."""

    sampling_rate: float
    samples: np.ndarray

    def __post_init__(self):
        if self.sampling_rate <= 0:
            raise ValueError("sampling_rate must be positive")
        arr = np.ascontiguousarray(self.samples, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("samples must be a non-empty 1-D array")
        if not np.isfinite(arr).all():
            raise ValueError("samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n_samples(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        return (self.n_samples - 1) / self.sampling_rate

    def to_json_dict(self) -> dict:
        return {"fs": self.sampling_rate, "mv": self.samples.tolist()}

    @classmethod
    def from_json_dict(cls, data: dict) -> "DigitalSignal":
        return cls(sampling_rate=float(data["fs"]), samples=np.asarray(data["mv"], dtype=np.float64))


def sample_count(duration_s: float, rate: float) -> int:
    """Samples on the inclusive uniform grid t = 0, 1/rate, ..., <= duration."""
    return int(math.floor(duration_s * rate + 1e-9)) + 1


def pixels_to_physical(
    trace: PixelTrace,
    grid: GridGeometry,
    rate: float = DEFAULT_SAMPLING_RATE_HZ,
    constants: CalibrationConstants = STANDARD_CALIBRATION,
) -> DigitalSignal:
    """Convert a pixel trace into millivolts at a uniform sampling rate.

    Each column spans sec_per_large_square / width_pixels seconds and each
    pixel row 0.5 mV / height_pixels; the column samples are linearly
    interpolated onto the uniform time grid.
    """
    if grid.width_pixels <= 0 or grid.height_pixels <= 0:
        raise CalibrationError("grid spacing must be positive")
    if rate <= 0:
        raise CalibrationError("sampling rate must be positive")
    sec_per_col = constants.sec_per_large_square / grid.width_pixels
    mv_per_px = constants.mv_per_large_square / grid.height_pixels
    known = np.flatnonzero(np.isfinite(trace.y))
    if known.size == 0:
        raise CalibrationError("trace has no defined columns")
    times = known * sec_per_col
    volts = -trace.y[known] * mv_per_px
    duration = trace.n_columns * sec_per_col
    t = np.arange(sample_count(duration, rate)) / rate
    return DigitalSignal(rate, np.interp(t, times, volts))


def overlap_slices(lag: int, n_pred: int, n_ref: int) -> tuple[slice, slice]:
    """Index ranges where pred delayed by ``lag`` overlaps ref (may be empty)."""
    ref_start = max(0, lag)
    ref_stop = max(ref_start, min(n_pred + lag, n_ref))
    return slice(ref_start - lag, ref_stop - lag), slice(ref_start, ref_stop)


def _normalized_correlation(a: np.ndarray, b: np.ndarray) -> float | None:
    a = a - a.mean()
    b = b - b.mean()
    denom = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
    if denom == 0.0:
        return None
    return float(np.dot(a, b)) / denom


def align_lag(pred: DigitalSignal, ref: DigitalSignal, max_lag: int = DEFAULT_LAG_WINDOW) -> tuple[int, DigitalSignal]:
    """Lag in [-max_lag, +max_lag] maximizing normalized cross-correlation.

    Returns the lag and pred truncated to the overlapping region after the
    shift.  Ties break toward smaller |lag|, then toward the negative lag.
    """
    if pred.sampling_rate != ref.sampling_rate:
        raise AlignmentError(
            f"sampling rates differ: {pred.sampling_rate} vs {ref.sampling_rate}"
        )
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    best: tuple[float, int] | None = None
    # visiting lags as 0, -1, +1, -2, +2, ... makes "first strictly greater
    # correlation wins" implement the tie-break exactly
    lag_order = [0]
    for k in range(1, max_lag + 1):
        lag_order += [-k, k]
    for lag in lag_order:
        pred_slice, ref_slice = overlap_slices(lag, pred.n_samples, ref.n_samples)
        a = pred.samples[pred_slice]
        b = ref.samples[ref_slice]
        if a.size < 2:
            continue
        corr = _normalized_correlation(a, b)
        if corr is None:
            continue
        if best is None or corr > best[0]:
            best = (corr, lag)
    if best is None:
        raise AlignmentError("no lag gives a non-constant overlap of >= 2 samples")
    lag = best[1]
    pred_slice, _ = overlap_slices(lag, pred.n_samples, ref.n_samples)
    return lag, DigitalSignal(pred.sampling_rate, pred.samples[pred_slice])


def remove_baseline(sig: DigitalSignal) -> DigitalSignal:
    """Subtract the median sample (mean of the central two for even lengths)."""
    return DigitalSignal(sig.sampling_rate, sig.samples - np.median(sig.samples))
