"""ECG trace image digitization: grid detection, adaptive binarization,
least-cost path extraction, calibration, and evaluation metrics."""

from .binarize import HedgingTrace, adaptive_binarize, denoise, otsu_threshold
from .calibrate import (
    CalibrationConstants,
    DigitalSignal,
    STANDARD_CALIBRATION,
    align_lag,
    pixels_to_physical,
    remove_baseline,
)
from .errors import (
    AlignmentError,
    CalibrationError,
    DecodeError,
    DigitizeError,
    EmptyGridError,
    EmptyTraceError,
    GridUndetectedError,
    StageError,
    UndefinedCorrelationError,
    UnsupportedFormatError,
)
from .grid import (
    GridGeometry,
    GridLine,
    LineSet,
    detect_lines,
    estimate_grid,
    grid_detectable,
    isolate_grid_pixels,
)
from .metrics import AggregateReport, EvalReport, aggregate, iou, mse, pearson
from .pipeline import Diagnostics, PipelineConfig, digitize, evaluate
from .raster import (
    BinaryMask,
    GrayImage,
    RasterImage,
    binarize_fixed,
    decode_image,
    encode_png,
    read_image,
    to_grayscale,
    write_png,
)
from .synth import RenderSpec, SignalSpec, gen_signal, inject_overlap, rasterize
from .trace import ColumnNodes, PixelTrace, column_nodes, fill_gaps, viterbi_trace

__version__ = "0.1.0"

__all__ = [
    "AggregateReport",
    "AlignmentError",
    "BinaryMask",
    "CalibrationConstants",
    "CalibrationError",
    "ColumnNodes",
    "DecodeError",
    "Diagnostics",
    "DigitalSignal",
    "DigitizeError",
    "EmptyGridError",
    "EmptyTraceError",
    "EvalReport",
    "GrayImage",
    "GridGeometry",
    "GridLine",
    "GridUndetectedError",
    "HedgingTrace",
    "LineSet",
    "PipelineConfig",
    "PixelTrace",
    "RasterImage",
    "RenderSpec",
    "STANDARD_CALIBRATION",
    "SignalSpec",
    "StageError",
    "UndefinedCorrelationError",
    "UnsupportedFormatError",
    "adaptive_binarize",
    "aggregate",
    "align_lag",
    "binarize_fixed",
    "column_nodes",
    "decode_image",
    "denoise",
    "detect_lines",
    "digitize",
    "encode_png",
    "estimate_grid",
    "evaluate",
    "fill_gaps",
    "gen_signal",
    "grid_detectable",
    "inject_overlap",
    "iou",
    "isolate_grid_pixels",
    "mse",
    "otsu_threshold",
    "pearson",
    "pixels_to_physical",
    "rasterize",
    "read_image",
    "remove_baseline",
    "to_grayscale",
    "viterbi_trace",
    "write_png",
]
