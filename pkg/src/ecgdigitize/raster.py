"""Pixel-grid types, grayscale conversion, fixed thresholding, and file IO.

The three image types are immutable, numpy-backed value objects.  A
``BinaryMask`` stores True where a pixel belongs to the signal; the
convention throughout is dark-on-light, i.e. trace pixels are the dark ones.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, UnsupportedFormatError

# ITU-R 601 luma weights for R, G, B.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def _frozen(pixels: np.ndarray) -> np.ndarray:
    pixels.setflags(write=False)
    return pixels


@dataclass(frozen=True, eq=False)
class RasterImage:
    """8-bit RGB image; ``pixels`` has shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if p.ndim != 3 or p.shape[2] != 3 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError(f"RasterImage needs (H, W, 3) uint8 pixels, got shape {p.shape}")
        object.__setattr__(self, "pixels", _frozen(p))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit intensity image; ``pixels`` has shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError(f"GrayImage needs (H, W) uint8 pixels, got shape {p.shape}")
        object.__setattr__(self, "pixels", _frozen(p))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean signal mask; True = signal pixel (drawn dark on paper)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.pixels, dtype=bool)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError(f"BinaryMask needs (H, W) bool pixels, got shape {p.shape}")
        object.__setattr__(self, "pixels", _frozen(p))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def signal_count(self) -> int:
        return int(np.count_nonzero(self.pixels))


def to_grayscale(img: RasterImage) -> GrayImage:
    """ITU-R 601 luma, rounded half-up and clamped to 0..255."""
    rgb = img.pixels.astype(np.float64)
    luma = rgb[..., 0] * LUMA_WEIGHTS[0] + rgb[..., 1] * LUMA_WEIGHTS[1] + rgb[..., 2] * LUMA_WEIGHTS[2]
    return GrayImage(np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8))


def binarize_fixed(img: GrayImage, threshold: float) -> BinaryMask:
    """A pixel is signal iff its intensity is strictly below ``threshold``."""
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be in [0, 255], got {threshold}")
    return BinaryMask(img.pixels < threshold)


_SUPPORTED_FORMATS = ("PNG", "BMP")


def decode_image(data: bytes) -> RasterImage | BinaryMask:
    """Decode PNG or BMP bytes, pixel-exact.

    A decoded image whose pixels are all pure black or pure white comes back
    as a BinaryMask (black = signal); everything else is a RasterImage.
    """
    try:
        img = Image.open(io.BytesIO(data))
    except UnidentifiedImageError as exc:
        raise DecodeError(f"not a decodable image: {exc}") from exc

    if img.format not in _SUPPORTED_FORMATS:
        raise UnsupportedFormatError(f"unsupported format {img.format!r}; only PNG and BMP are read")
    if img.format == "BMP" and int(img.info.get("compression", 0)) != 0:
        raise UnsupportedFormatError("compressed BMP is not supported")

    mode = img.mode
    if img.format == "PNG" and mode not in ("L", "RGB"):
        raise UnsupportedFormatError(f"unsupported PNG mode {mode!r}; only 8-bit grayscale and RGB are read")
    if img.format == "BMP" and mode not in ("1", "L", "P", "RGB"):
        raise UnsupportedFormatError(f"unsupported BMP mode {mode!r}")

    try:
        if mode == "P":
            img = img.convert("RGB")
        img.load()
    except OSError as exc:
        raise DecodeError(f"broken image data: {exc}") from exc

    arr = np.asarray(img)
    if arr.size == 0:
        raise DecodeError("image decodes to zero pixels")

    if img.mode == "1":
        # PIL gives True for white; mask convention is black = signal.
        return BinaryMask(~arr)
    if arr.ndim == 2:
        if np.isin(arr, (0, 255)).all():
            return BinaryMask(arr == 0)
        return RasterImage(np.repeat(arr[:, :, None], 3, axis=2))
    black = (arr == 0).all(axis=2)
    white = (arr == 255).all(axis=2)
    if (black | white).all():
        return BinaryMask(black)
    return RasterImage(arr)


def encode_png(image: RasterImage | GrayImage | BinaryMask) -> bytes:
    """Encode as PNG: RGB for raster images, 8-bit grayscale otherwise."""
    if isinstance(image, RasterImage):
        pil = Image.fromarray(image.pixels, mode="RGB")
    elif isinstance(image, GrayImage):
        pil = Image.fromarray(image.pixels, mode="L")
    elif isinstance(image, BinaryMask):
        pil = Image.fromarray(np.where(image.pixels, 0, 255).astype(np.uint8), mode="L")
    else:
        raise TypeError(f"cannot encode {type(image).__name__}")
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def read_image(path: str | Path) -> RasterImage | BinaryMask:
    return decode_image(Path(path).read_bytes())


def write_png(path: str | Path, image: RasterImage | GrayImage | BinaryMask) -> None:
    Path(path).write_bytes(encode_png(image))
