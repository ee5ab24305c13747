"""Otsu thresholding and the iterative hedging-factor binarization.

The hedging loop multiplies the Otsu threshold by a factor that starts at
1.0 and shrinks 5% per step, re-binarizing until the grid lines stop being
detectable or the factor bottoms out at 0.6.  This strips the lighter grid
while keeping the darker trace.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import grid_detectable
from .raster import BinaryMask, GrayImage, binarize_fixed

HEDGE_FLOOR = 0.6
HEDGE_STEP = 0.95

STOP_GRID_GONE = "grid-gone"
STOP_FLOOR_REACHED = "floor-reached"
STOP_NO_GRID_INITIALLY = "no-grid-initially"


@dataclass(frozen=True)
class HedgingTrace:
    """Diagnostic record of one adaptive binarization run."""

    otsu_threshold: int
    factors: tuple[float, ...]
    final_factor: float
    stop_reason: str

    def __post_init__(self):
        if not self.factors or self.factors[0] != 1.0:
            raise ValueError("hedging factors must start at 1.0")
        if self.final_factor != self.factors[-1]:
            raise ValueError("final_factor must equal the last applied factor")

    def to_json_dict(self) -> dict:
        return {
            "otsu_threshold": self.otsu_threshold,
            "factors": list(self.factors),
            "final_factor": self.final_factor,
            "stop_reason": self.stop_reason,
        }


def otsu_threshold(img: GrayImage) -> int:
    """Threshold minimizing the weighted intra-class intensity variance.

    Class 0 is {intensity <= t}.  Exact integer arithmetic makes the argmin
    unambiguous; ties break toward the smallest t.  A single-intensity image
    is degenerate and returns that intensity with a warning.
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256)
    if np.count_nonzero(hist) == 1:
        level = int(np.flatnonzero(hist)[0])
        warnings.warn("single-intensity image: Otsu threshold is degenerate", RuntimeWarning, stacklevel=2)
        return level
    return _otsu_from_histogram(hist)


def _otsu_from_histogram(hist: np.ndarray) -> int:
    # Minimizing w0*var0 + w1*var1 is equivalent to maximizing
    # g(t) = S0^2/n0 + S1^2/n1 with integer class counts n and sums S
    # (empty-class terms are zero).  Fractions are compared by
    # cross-multiplication, so the result is exact.
    counts = [int(c) for c in hist]
    total_n = sum(counts)
    total_s = sum(i * c for i, c in enumerate(counts))
    n0 = 0
    s0 = 0
    best_t = 0
    best_num, best_den = -1, 1
    for t in range(256):
        n0 += counts[t]
        s0 += t * counts[t]
        n1 = total_n - n0
        s1 = total_s - s0
        if n0 == 0:
            num, den = s1 * s1, n1
        elif n1 == 0:
            num, den = s0 * s0, n0
        else:
            num, den = s0 * s0 * n1 + s1 * s1 * n0, n0 * n1
        if num * best_den > best_num * den:
            best_num, best_den, best_t = num, den, t
    return best_t


def adaptive_binarize(
    img: GrayImage,
    *,
    floor: float = HEDGE_FLOOR,
    step: float = HEDGE_STEP,
) -> tuple[BinaryMask, HedgingTrace]:
    """Binarize at otsu * hedging-factor, shrinking the factor until the grid is gone.

    Every applied factor is recorded.  The floor value is itself applied
    once (a final binarization at exactly ``floor``) before giving up.
    """
    if not 0 < floor <= 1.0 or not 0 < step < 1.0:
        raise ValueError("hedging needs 0 < floor <= 1 and 0 < step < 1")
    otsu = otsu_threshold(img)
    factor = 1.0
    factors = [factor]
    mask = binarize_fixed(img, otsu * factor)
    if not grid_detectable(mask):
        return mask, HedgingTrace(otsu, tuple(factors), factor, STOP_NO_GRID_INITIALLY)
    while grid_detectable(mask) and factor > floor:
        factor = max(step * factor, floor)
        factors.append(factor)
        mask = binarize_fixed(img, otsu * factor)
    reason = STOP_FLOOR_REACHED if grid_detectable(mask) else STOP_GRID_GONE
    return mask, HedgingTrace(otsu, tuple(factors), factor, reason)


_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def denoise(mask: BinaryMask, min_area: int = 4) -> BinaryMask:
    """Drop 4-connected signal components smaller than ``min_area`` pixels."""
    labels, n_components = ndimage.label(mask.pixels, structure=_FOUR_CONNECTED)
    if n_components == 0:
        return mask
    sizes = np.bincount(labels.ravel())
    keep = sizes >= min_area
    keep[0] = False
    return BinaryMask(keep[labels])
