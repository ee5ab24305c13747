"""End-to-end flows: digitize an image or mask, evaluate against a reference.

Raw images run grid detection plus the hedging binarization; an externally
supplied mask skips binarization and takes its grid from a companion color
image or from the config.  Evaluation applies the same corrections (lag
alignment, median baseline removal, truncation to the overlap) to every
prediction regardless of where it came from.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field, asdict

from .binarize import HEDGE_FLOOR, HEDGE_STEP, HedgingTrace, adaptive_binarize, denoise
from .calibrate import (
    CalibrationConstants,
    DEFAULT_LAG_WINDOW,
    DEFAULT_SAMPLING_RATE_HZ,
    DigitalSignal,
    align_lag,
    overlap_slices,
    pixels_to_physical,
    remove_baseline,
)
from .errors import DigitizeError, EmptyGridError, GridUndetectedError, StageError
from .grid import GridGeometry, LineSet, detect_lines, estimate_grid, isolate_grid_pixels
from .metrics import EvalReport, iou, mse, pearson
from .raster import BinaryMask, RasterImage, to_grayscale
from .trace import ALPHA, ANGLE_SCALE, PixelTrace, column_nodes, fill_gaps, viterbi_trace

MODE_RAW = "raw"
MODE_MASK = "mask"

GRID_FALLBACK_ERROR = "error"
GRID_FALLBACK_SQUARE = "assume-square-default"


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs of the digitization pipeline; defaults match the standard recipe."""

    mode: str = MODE_RAW
    sampling_rate_hz: float = DEFAULT_SAMPLING_RATE_HZ
    hedge_floor: float = HEDGE_FLOOR
    hedge_step: float = HEDGE_STEP
    alpha: float = ALPHA
    angle_scale: float = ANGLE_SCALE
    lag_window: int = DEFAULT_LAG_WINDOW
    denoise: bool = False
    grid_fallback: str = GRID_FALLBACK_ERROR
    fallback_square_px: float = 20.0
    grid: GridGeometry | None = None
    calibration: CalibrationConstants = field(default_factory=CalibrationConstants)

    def __post_init__(self):
        if self.mode not in (MODE_RAW, MODE_MASK):
            raise ValueError(f"mode must be '{MODE_RAW}' or '{MODE_MASK}'")
        if self.sampling_rate_hz <= 0:
            raise ValueError("sampling rate must be positive")
        if not 0 < self.hedge_floor <= 1 or not 0 < self.hedge_step < 1:
            raise ValueError("hedging needs 0 < floor <= 1 and 0 < step < 1")
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must be in [0, 1]")
        if self.angle_scale < 0:
            raise ValueError("angle_scale must be >= 0")
        if self.lag_window < 0:
            raise ValueError("lag window must be >= 0")
        if self.grid_fallback not in (GRID_FALLBACK_ERROR, GRID_FALLBACK_SQUARE):
            raise ValueError(f"grid_fallback must be '{GRID_FALLBACK_ERROR}' or '{GRID_FALLBACK_SQUARE}'")
        if self.fallback_square_px <= 0:
            raise ValueError("fallback square spacing must be positive")

    def to_json_dict(self) -> dict:
        data = asdict(self)
        data["grid"] = self.grid.to_json_dict() if self.grid else None
        return data


DEFAULT_CONFIG = PipelineConfig()


@dataclass(frozen=True)
class Diagnostics:
    """Intermediate artifacts of one digitize call."""

    grid: GridGeometry
    lines: LineSet | None
    hedging: HedgingTrace | None
    trace: PixelTrace

    def to_json_dict(self) -> dict:
        return {
            "grid": self.grid.to_json_dict(),
            "lines": None
            if self.lines is None
            else {
                "horizontals": [[l.position, l.score] for l in self.lines.horizontals],
                "verticals": [[l.position, l.score] for l in self.lines.verticals],
            },
            "hedging": self.hedging.to_json_dict() if self.hedging else None,
            "trace": self.trace.to_json_dict(),
        }


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except DigitizeError as exc:
        raise StageError(name, exc) from exc


def _detect_grid(image: RasterImage, config: PipelineConfig) -> tuple[GridGeometry, LineSet | None]:
    try:
        lines = detect_lines(isolate_grid_pixels(image))
        return estimate_grid(lines), lines
    except (EmptyGridError, GridUndetectedError) as exc:
        if config.grid_fallback == GRID_FALLBACK_SQUARE:
            side = config.fallback_square_px
            return GridGeometry(side, side, square_assumed=True), None
        raise StageError("grid", exc) from exc


def digitize(
    source: RasterImage | BinaryMask,
    config: PipelineConfig = DEFAULT_CONFIG,
    companion: RasterImage | None = None,
) -> tuple[DigitalSignal, Diagnostics]:
    """Convert an ECG lead image or signal mask into a calibrated signal.

    A RasterImage source runs grid detection and adaptive binarization.  A
    BinaryMask source takes its grid from ``companion`` (a color image of the
    same lead) or from ``config.grid``.
    """
    hedging: HedgingTrace | None = None
    lines: LineSet | None = None
    if isinstance(source, RasterImage):
        grid_geometry, lines = _detect_grid(source, config)
        with _stage("binarize"):
            mask, hedging = adaptive_binarize(
                to_grayscale(source), floor=config.hedge_floor, step=config.hedge_step
            )
            if config.denoise:
                mask = denoise(mask)
    elif isinstance(source, BinaryMask):
        if companion is not None:
            grid_geometry, lines = _detect_grid(companion, config)
        elif config.grid is not None:
            grid_geometry = config.grid
        else:
            raise StageError(
                "grid",
                GridUndetectedError("mask input needs a companion image or an explicit grid in the config"),
            )
        mask = denoise(source) if config.denoise else source
    else:
        raise TypeError(f"cannot digitize {type(source).__name__}")

    with _stage("trace"):
        nodes = column_nodes(mask)
        raw_trace = viterbi_trace(nodes, alpha=config.alpha, angle_scale=config.angle_scale)
        trace = fill_gaps(raw_trace, mask.width)
    with _stage("calibrate"):
        signal = pixels_to_physical(trace, grid_geometry, config.sampling_rate_hz, config.calibration)
        signal = remove_baseline(signal)
    return signal, Diagnostics(grid=grid_geometry, lines=lines, hedging=hedging, trace=trace)


def evaluate(
    pred: DigitalSignal,
    ref: DigitalSignal,
    config: PipelineConfig = DEFAULT_CONFIG,
    pred_mask: BinaryMask | None = None,
    ref_mask: BinaryMask | None = None,
) -> EvalReport:
    """Score a prediction: lag-align, truncate to the overlap, remove both
    baselines, then MSE and Pearson correlation (plus IoU when masks given)."""
    lag, aligned_pred = align_lag(pred, ref, config.lag_window)
    _, ref_slice = overlap_slices(lag, pred.n_samples, ref.n_samples)
    ref_segment = DigitalSignal(ref.sampling_rate, ref.samples[ref_slice])
    p = remove_baseline(aligned_pred)
    r = remove_baseline(ref_segment)
    mask_iou = iou(pred_mask, ref_mask) if pred_mask is not None and ref_mask is not None else None
    return EvalReport(
        mse=mse(p, r),
        pearson=pearson(p, r),
        lag=lag,
        n_samples=p.n_samples,
        iou=mask_iou,
    )
