"""Grid-line isolation, axis-aligned Hough line detection, and spacing estimation.

The grid is what calibrates everything downstream: one large ECG square is
0.2 s wide and 0.5 mV tall, so the pixel spacing of the detected bold lines
converts pixel coordinates into physical units.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import EmptyGridError, GridUndetectedError
from .raster import BinaryMask, GrayImage, RasterImage, to_grayscale

# Hough restricted to near-axis angles, 1 degree steps, 1 px rho bins.
ANGLE_WINDOW_DEG = 2
ACCUMULATOR_FRACTION = 0.5
MERGE_RADIUS_PX = 4.0

# 1-D k-means over the intensity histogram.
KMEANS_SEEDS = (0.0, 128.0, 255.0)
KMEANS_MAX_ITER = 50
KMEANS_TOL = 0.5

# Bold lines sit 5 small squares apart; a gap-cluster ratio in this range
# means both line families were detected.
SMALL_TO_LARGE_RATIO = (4.0, 6.0)


@dataclass(frozen=True)
class GridLine:
    """One detected line: its row/column coordinate and accumulator score."""

    position: float
    score: float


@dataclass(frozen=True)
class LineSet:
    """Dominant horizontal and vertical lines, sorted by coordinate."""

    horizontals: tuple[GridLine, ...]
    verticals: tuple[GridLine, ...]

    def __post_init__(self):
        for lines in (self.horizontals, self.verticals):
            positions = [line.position for line in lines]
            if positions != sorted(positions):
                raise ValueError("lines must be sorted by position")

    @property
    def count(self) -> int:
        return len(self.horizontals) + len(self.verticals)


@dataclass(frozen=True)
class GridGeometry:
    """Pixels per large grid square along each axis."""

    width_pixels: float
    height_pixels: float
    square_assumed: bool = False

    def __post_init__(self):
        if self.width_pixels <= 0 or self.height_pixels <= 0:
            raise ValueError("grid spacing must be positive")
        if self.square_assumed and self.height_pixels != self.width_pixels:
            raise ValueError("square_assumed requires height_pixels == width_pixels")

    def to_json_dict(self) -> dict:
        return {
            "width_pixels": self.width_pixels,
            "height_pixels": self.height_pixels,
            "square_assumed": self.square_assumed,
        }


def _kmeans_levels(hist: np.ndarray, seeds: tuple[float, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Weighted 1-D k-means over the 256 intensity levels.

    Deterministic: fixed seeds, argmin ties go to the lower-indexed center,
    empty clusters keep their previous center.
    """
    levels = np.arange(256, dtype=np.float64)
    weights = hist.astype(np.float64)
    centers = np.asarray(seeds, dtype=np.float64)
    for _ in range(KMEANS_MAX_ITER):
        assign = np.argmin(np.abs(levels[:, None] - centers[None, :]), axis=1)
        new_centers = centers.copy()
        for j in range(len(centers)):
            w = weights[assign == j]
            if w.sum() > 0:
                new_centers[j] = float(np.sum(levels[assign == j] * w) / w.sum())
        moved = float(np.max(np.abs(new_centers - centers)))
        centers = new_centers
        if moved <= KMEANS_TOL:
            break
    assign = np.argmin(np.abs(levels[:, None] - centers[None, :]), axis=1)
    return centers, assign


def cluster_mid_intensity(gray: GrayImage) -> BinaryMask:
    """Pixels of the middle of three intensity clusters (the grid-line shade).

    With only two distinct intensities there is no middle cluster: the image
    can only contain trace and background, so the result is empty.
    """
    hist = np.bincount(gray.pixels.ravel(), minlength=256)
    distinct = int(np.count_nonzero(hist))
    if distinct < 2:
        raise EmptyGridError("uniform image has no grid cluster")
    if distinct < 3:
        return BinaryMask(np.zeros(gray.pixels.shape, dtype=bool))
    centers, assign = _kmeans_levels(hist, KMEANS_SEEDS)
    populated = [j for j in range(len(centers)) if np.any(hist[assign == j] > 0)]
    if len(populated) < 3:
        return BinaryMask(np.zeros(gray.pixels.shape, dtype=bool))
    mid = sorted(populated, key=lambda j: centers[j])[1]
    lut = assign == mid
    return BinaryMask(lut[gray.pixels])


def _binary_open(mask: np.ndarray, element: np.ndarray) -> np.ndarray:
    # border_value=1 on erosion so line structures touching the canvas edge survive
    return ndimage.binary_dilation(ndimage.binary_erosion(mask, element, border_value=1), element)


def refine_grid_mask(mask: BinaryMask) -> BinaryMask:
    """Morphological cleanup: keep 1-px line structures, drop speckle.

    Union of openings with 1x3 and 3x1 line elements, then a 3x3 closing to
    bridge small gaps left where the trace overdrew the grid.
    """
    m = mask.pixels
    opened = _binary_open(m, np.ones((1, 3), bool)) | _binary_open(m, np.ones((3, 1), bool))
    square = np.ones((3, 3), bool)
    closed = ndimage.binary_erosion(ndimage.binary_dilation(opened, square), square, border_value=1)
    return BinaryMask(closed)


def isolate_grid_pixels(img: RasterImage) -> BinaryMask:
    """Grid-line pixels of a color scan: mid-intensity cluster, then morphology."""
    return refine_grid_mask(cluster_mid_intensity(to_grayscale(img)))


def _merge_candidates(candidates: list[tuple[float, float]]) -> tuple[GridLine, ...]:
    """Merge near-duplicate detections (within MERGE_RADIUS_PX) by score-weighted mean."""
    candidates.sort()
    groups: list[list[tuple[float, float]]] = []
    for coord, score in candidates:
        if groups and coord - groups[-1][-1][0] <= MERGE_RADIUS_PX:
            groups[-1].append((coord, score))
        else:
            groups.append([(coord, score)])
    merged = []
    for group in groups:
        total = sum(score for _, score in group)
        position = sum(coord * score for coord, score in group) / total
        merged.append(GridLine(position, total))
    return tuple(merged)


def detect_lines(mask: BinaryMask) -> LineSet:
    """Dominant near-horizontal and near-vertical lines of a binary mask.

    Standard (rho, theta) Hough accumulator restricted to theta within
    ANGLE_WINDOW_DEG of 0 and 90 degrees at 1 degree steps and 1 px rho
    resolution.  A line is kept when its accumulator reaches half the
    relevant image dimension; near-duplicates are merged.  Each line is
    reported as its coordinate where it crosses the image center line.
    """
    ys, xs = np.nonzero(mask.pixels)
    if xs.size == 0:
        return LineSet((), ())
    h, w = mask.pixels.shape
    xc, yc = (w - 1) / 2.0, (h - 1) / 2.0

    vertical_cands: list[tuple[float, float]] = []
    horizontal_cands: list[tuple[float, float]] = []
    window = range(-ANGLE_WINDOW_DEG, ANGLE_WINDOW_DEG + 1)
    for base, cands, dim in ((0, vertical_cands, h), (90, horizontal_cands, w)):
        for offset in window:
            theta = math.radians(base + offset)
            cos_t, sin_t = math.cos(theta), math.sin(theta)
            rho = np.rint(xs * cos_t + ys * sin_t).astype(np.int64)
            rho_min = int(rho.min())
            counts = np.bincount(rho - rho_min)
            for bin_idx in np.flatnonzero(counts >= ACCUMULATOR_FRACTION * dim):
                score = float(counts[bin_idx])
                r = float(bin_idx + rho_min)
                if base == 0:
                    coord = (r - yc * sin_t) / cos_t
                    coord = min(max(coord, 0.0), w - 1.0)
                else:
                    coord = (r - xc * cos_t) / sin_t
                    coord = min(max(coord, 0.0), h - 1.0)
                cands.append((coord, score))

    return LineSet(
        horizontals=_merge_candidates(horizontal_cands),
        verticals=_merge_candidates(vertical_cands),
    )


def _large_square_spacing(gaps: np.ndarray) -> float:
    """Median line gap, preferring the large cluster of a bimodal small/large mix."""
    gaps = np.sort(np.asarray(gaps, dtype=np.float64))
    if gaps.size >= 2:
        ratios = gaps[1:] / np.maximum(gaps[:-1], 1e-9)
        split = int(np.argmax(ratios))
        low, high = gaps[: split + 1], gaps[split + 1 :]
        if low.size and high.size and low.mean() > 0:
            ratio = high.mean() / low.mean()
            if SMALL_TO_LARGE_RATIO[0] <= ratio <= SMALL_TO_LARGE_RATIO[1]:
                warnings.warn(
                    "bimodal line spacing detected; using the larger cluster as the large square",
                    RuntimeWarning,
                    stacklevel=3,
                )
                return float(np.median(high))
    return float(np.median(gaps))


def estimate_grid(lines: LineSet) -> GridGeometry:
    """Large-square pixel spacing from detected lines.

    Needs at least two vertical lines.  With fewer than two horizontals a
    square grid is assumed and the vertical spacing is reused.
    """
    verticals = [line.position for line in lines.verticals]
    if len(verticals) < 2:
        raise GridUndetectedError(f"need >= 2 vertical lines to estimate spacing, found {len(verticals)}")
    width = _large_square_spacing(np.diff(verticals))
    horizontals = [line.position for line in lines.horizontals]
    if len(horizontals) >= 2:
        return GridGeometry(width_pixels=width, height_pixels=_large_square_spacing(np.diff(horizontals)))
    return GridGeometry(width_pixels=width, height_pixels=width, square_assumed=True)


def grid_detectable(mask: BinaryMask) -> bool:
    """True while enough grid lines survive in the mask (>= 3 in total)."""
    return detect_lines(mask).count >= 3
