"""Exception types raised by the digitization stages."""


class DigitizeError(Exception):
    """Base class for all library errors."""


class DecodeError(DigitizeError):
    """Image bytes could not be decoded (malformed or truncated file)."""


class UnsupportedFormatError(DigitizeError):
    """Image format, mode, or bit depth outside the supported set."""


class EmptyGridError(DigitizeError):
    """No grid pixel cluster exists (e.g. uniform image)."""


class GridUndetectedError(DigitizeError):
    """Too few grid lines to estimate the large-square spacing."""


class EmptyTraceError(DigitizeError):
    """The mask has no signal pixels in any column."""


class CalibrationError(DigitizeError):
    """Pixel-to-physical conversion is impossible (bad grid or rate)."""


class AlignmentError(DigitizeError):
    """Cross-correlation alignment failed (rate mismatch or no overlap)."""


class UndefinedCorrelationError(DigitizeError):
    """Pearson correlation undefined because an input is constant."""


class StageError(DigitizeError):
    """Error propagated from a pipeline stage, labeled with the stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
