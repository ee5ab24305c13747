"""Deterministic synthetic ECG renderings with exact ground truth.

Generates Gaussian-bump waveforms, rasterizes them onto grid paper using the
same 0.5 mV / 0.2 s large-square constants the calibrator inverts, and can
contaminate an image with a 30 px band of another lead's trace while leaving
the clean mask untouched.  Everything is reproducible from (spec, seed); the
random source is numpy's PCG64.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .calibrate import CalibrationConstants, DigitalSignal, STANDARD_CALIBRATION, sample_count
from .grid import GridGeometry
from .raster import BinaryMask, RasterImage, LUMA_WEIGHTS

OVERLAP_BAND_PX = 30
_BAND_INNER_MARGIN_PX = 5

# Relative sizes/offsets of the beat components. Q and S are narrow negative
# bumps flanking R; P and T centers scale with the beat period.
_Q_FRACTION = -0.25
_S_FRACTION = -0.30
_P_OFFSET = -0.21
_T_OFFSET = 0.32


def _luma(color: tuple[int, int, int]) -> float:
    return sum(c * w for c, w in zip(color, LUMA_WEIGHTS))


@dataclass(frozen=True)
class SignalSpec:
    """Waveform recipe: per-beat Gaussian bump amplitudes/widths plus noise."""

    duration_s: float = 9.59
    heart_rate_bpm: float = 60.0
    p_amplitude_mv: float = 0.15
    p_width_s: float = 0.09
    qrs_amplitude_mv: float = 1.0
    qrs_width_s: float = 0.05
    t_amplitude_mv: float = 0.3
    t_width_s: float = 0.16
    noise_mv: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValueError("duration must be positive")
        if self.heart_rate_bpm <= 0:
            raise ValueError("heart rate must be positive")
        for amp in (self.p_amplitude_mv, self.qrs_amplitude_mv, self.t_amplitude_mv):
            if abs(amp) > 2.0:
                raise ValueError("component amplitudes must stay within +/-2 mV")
        for width in (self.p_width_s, self.qrs_width_s, self.t_width_s):
            if width <= 0:
                raise ValueError("component widths must be positive")
        if self.noise_mv < 0:
            raise ValueError("noise amplitude must be >= 0")


@dataclass(frozen=True)
class RenderSpec:
    """Canvas, grid spacing, colors, and trace thickness for rasterization."""

    width_px: int = 960
    height_px: int = 96
    square_px_h: float = 20.0
    square_px_v: float = 20.0
    minor_lines: bool = False
    trace_thickness: int = 1
    trace_color: tuple[int, int, int] = (30, 30, 30)
    bold_color: tuple[int, int, int] = (230, 120, 120)
    minor_color: tuple[int, int, int] = (250, 180, 180)
    background_color: tuple[int, int, int] = (255, 255, 255)
    baseline_row: float | None = None
    grid_phase: tuple[float, float] = (0.0, 0.0)  # (row, col) offset of the grid origin

    def __post_init__(self):
        if self.square_px_h < 8 or self.square_px_v < 8:
            raise ValueError("grid spacing must be >= 8 px")
        if self.trace_thickness < 1:
            raise ValueError("trace thickness must be >= 1 px")
        if self.width_px < self.square_px_h or self.height_px < self.square_px_v:
            raise ValueError("canvas must fit at least one large square each way")
        colors = (self.trace_color, self.bold_color, self.minor_color, self.background_color)
        lumas = [_luma(c) for c in colors]
        for i in range(len(lumas)):
            for j in range(i + 1, len(lumas)):
                if abs(lumas[i] - lumas[j]) < 30:
                    raise ValueError("render colors need pairwise grayscale distance >= 30")

    @property
    def baseline(self) -> float:
        return self.height_px / 2.0 if self.baseline_row is None else self.baseline_row


def gen_signal(spec: SignalSpec, rate: float = 100.0) -> DigitalSignal:
    """Sum of Gaussian bumps per beat (P, Q/R/S triplet, T), plus seeded noise."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    n = sample_count(spec.duration_s, rate)
    t = np.arange(n) / rate
    out = np.zeros(n)
    period = 60.0 / spec.heart_rate_bpm
    n_beats = int(math.floor(spec.duration_s / period)) + 1
    for beat in range(n_beats):
        r_center = beat * period + 0.35 * period
        bumps = (
            (r_center + _P_OFFSET * period, spec.p_amplitude_mv, spec.p_width_s / 2.0),
            (r_center - spec.qrs_width_s, _Q_FRACTION * spec.qrs_amplitude_mv, spec.qrs_width_s / 4.0),
            (r_center, spec.qrs_amplitude_mv, spec.qrs_width_s / 2.0),
            (r_center + spec.qrs_width_s, _S_FRACTION * spec.qrs_amplitude_mv, spec.qrs_width_s / 4.0),
            (r_center + _T_OFFSET * period, spec.t_amplitude_mv, spec.t_width_s / 2.0),
        )
        for center, amp, sigma in bumps:
            if amp != 0.0:
                out += amp * np.exp(-((t - center) ** 2) / (2.0 * sigma * sigma))
    if spec.noise_mv > 0:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        out += spec.noise_mv * rng.standard_normal(n)
    return DigitalSignal(rate, out)


def _trace_spans(y_cols: np.ndarray, thickness: int) -> tuple[np.ndarray, np.ndarray]:
    """Vertical float span [lo, hi] each column must cover so the polyline connects."""
    mid_prev = np.empty_like(y_cols)
    mid_next = np.empty_like(y_cols)
    mid_prev[0] = y_cols[0]
    mid_prev[1:] = (y_cols[1:] + y_cols[:-1]) / 2.0
    mid_next[-1] = y_cols[-1]
    mid_next[:-1] = mid_prev[1:]
    half = (thickness - 1) / 2.0
    lo = np.minimum(y_cols, np.minimum(mid_prev, mid_next)) - half
    hi = np.maximum(y_cols, np.maximum(mid_prev, mid_next)) + half
    return lo, hi


def _rasterize_spans(
    canvas: np.ndarray, lo: np.ndarray, hi: np.ndarray, columns: np.ndarray
) -> bool:
    """Paint the spans into a bool canvas; returns True when rows were clipped."""
    height = canvas.shape[0]
    r0 = np.floor(lo + 0.5).astype(np.int64)
    r1 = np.floor(hi + 0.5).astype(np.int64)
    clipped = bool((r0 < 0).any() or (r1 > height - 1).any())
    r0c = np.clip(r0, 0, height - 1)
    r1c = np.clip(r1, 0, height - 1)
    for col, a, b in zip(columns, r0c, r1c):
        if b >= a:
            canvas[a : b + 1, col] = True
    return clipped


def _grid_positions(phase: float, spacing: float, limit: int) -> list[int]:
    positions = []
    start = math.ceil((0 - phase) / spacing)
    k = start
    while phase + k * spacing <= limit - 1 + 1e-9:
        positions.append(int(round(phase + k * spacing)))
        k += 1
    return [p for p in positions if 0 <= p <= limit - 1]


def rasterize(
    sig: DigitalSignal,
    spec: RenderSpec = RenderSpec(),
    constants: CalibrationConstants = STANDARD_CALIBRATION,
) -> tuple[RasterImage, BinaryMask, GridGeometry]:
    """Draw grid paper plus the signal trace; return the image, the clean
    trace-only mask, and the exact grid geometry that was used."""
    sec_per_col = constants.sec_per_large_square / spec.square_px_h
    px_per_mv = spec.square_px_v / constants.mv_per_large_square
    n_cols = sample_count(sig.duration, 1.0 / sec_per_col)
    if n_cols > spec.width_px:
        raise ValueError(
            f"signal duration {sig.duration:.3f}s needs {n_cols} columns "
            f"but the canvas is only {spec.width_px} wide"
        )

    img = np.empty((spec.height_px, spec.width_px, 3), dtype=np.uint8)
    img[:] = spec.background_color

    phase_row, phase_col = spec.grid_phase
    if spec.minor_lines:
        minor_rows = set(_grid_positions(phase_row, spec.square_px_v / 5.0, spec.height_px))
        minor_cols = set(_grid_positions(phase_col, spec.square_px_h / 5.0, spec.width_px))
    else:
        minor_rows, minor_cols = set(), set()
    bold_rows = _grid_positions(phase_row, spec.square_px_v, spec.height_px)
    bold_cols = _grid_positions(phase_col, spec.square_px_h, spec.width_px)
    for r in sorted(minor_rows - set(bold_rows)):
        img[r, :] = spec.minor_color
    for c in sorted(minor_cols - set(bold_cols)):
        img[:, c] = spec.minor_color
    for r in bold_rows:
        img[r, :] = spec.bold_color
    for c in bold_cols:
        img[:, c] = spec.bold_color

    columns = np.arange(n_cols)
    t_samples = np.arange(sig.n_samples) / sig.sampling_rate
    volts = np.interp(columns * sec_per_col, t_samples, sig.samples)
    y_cols = spec.baseline - volts * px_per_mv
    lo, hi = _trace_spans(y_cols, spec.trace_thickness)
    mask = np.zeros((spec.height_px, spec.width_px), dtype=bool)
    if _rasterize_spans(mask, lo, hi, columns):
        warnings.warn("trace amplitude exceeds canvas; clipped to image", RuntimeWarning, stacklevel=2)
    img[mask] = spec.trace_color

    return (
        RasterImage(img),
        BinaryMask(mask),
        GridGeometry(width_pixels=spec.square_px_h, height_pixels=spec.square_px_v),
    )


def inject_overlap(
    img: RasterImage,
    mask: BinaryMask,
    other: DigitalSignal,
    spec: RenderSpec = RenderSpec(),
    seed: int = 0,
    constants: CalibrationConstants = STANDARD_CALIBRATION,
) -> tuple[RasterImage, BinaryMask]:
    """Overlay a 30 px tall band of another lead's trace onto the top or bottom.

    Returns the contaminated image and contaminated mask (union of both
    traces); the clean input mask stays the ground truth.  The band side and
    the segment of ``other`` are drawn from the seed.
    """
    if img.height <= OVERLAP_BAND_PX:
        raise ValueError(f"canvas height must exceed the {OVERLAP_BAND_PX} px overlap band")
    rng = np.random.Generator(np.random.PCG64(seed))
    on_top = bool(rng.integers(0, 2))
    band_start = 0 if on_top else img.height - OVERLAP_BAND_PX
    band_end = band_start + OVERLAP_BAND_PX - 1

    sec_per_col = constants.sec_per_large_square / spec.square_px_h
    px_per_mv = spec.square_px_v / constants.mv_per_large_square
    canvas_duration = (img.width - 1) * sec_per_col
    offset = float(rng.uniform(0.0, max(other.duration - canvas_duration, 0.0)))
    # the neighboring lead sits tight against this crop: its baseline runs
    # near the inner edge of the band, where it interferes with the primary
    # trace's excursions
    baseline = float(band_end - _BAND_INNER_MARGIN_PX if on_top else band_start + _BAND_INNER_MARGIN_PX)

    columns = np.arange(img.width)
    t_samples = np.arange(other.n_samples) / other.sampling_rate
    volts = np.interp(columns * sec_per_col + offset, t_samples, other.samples)
    y_cols = baseline - volts * px_per_mv
    lo, hi = _trace_spans(y_cols, spec.trace_thickness)
    # crop semantics: only the part of the neighboring waveform that falls
    # inside the band is pasted
    lo = np.maximum(lo, band_start)
    hi = np.minimum(hi, band_end)
    keep = lo <= hi
    band_mask = np.zeros((img.height, img.width), dtype=bool)
    _rasterize_spans(band_mask, lo[keep], hi[keep], columns[keep])

    contaminated_img = img.pixels.copy()
    contaminated_img[band_mask] = spec.trace_color
    return RasterImage(contaminated_img), BinaryMask(mask.pixels | band_mask)


def vary_signal(base: SignalSpec, seed: int) -> SignalSpec:
    """Seeded jitter of the waveform parameters for corpus generation."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return replace(
        base,
        heart_rate_bpm=float(rng.uniform(55.0, 90.0)),
        p_amplitude_mv=float(rng.uniform(0.10, 0.20)),
        qrs_amplitude_mv=float(rng.uniform(0.80, 1.12)),
        t_amplitude_mv=float(rng.uniform(0.20, 0.45)),
        seed=seed,
    )
