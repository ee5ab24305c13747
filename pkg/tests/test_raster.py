import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from ecgdigitize import (
    BinaryMask,
    DecodeError,
    GrayImage,
    RasterImage,
    UnsupportedFormatError,
    binarize_fixed,
    decode_image,
    encode_png,
    to_grayscale,
)


def solid(rgb, shape=(2, 3)):
    return RasterImage(np.full(shape + (3,), 0, dtype=np.uint8) + np.array(rgb, dtype=np.uint8))


class TestToGrayscale:
    def test_all_white(self):
        assert (to_grayscale(solid((255, 255, 255))).pixels == 255).all()

    def test_all_black(self):
        assert (to_grayscale(solid((0, 0, 0))).pixels == 0).all()

    def test_pure_red_luma(self):
        # round(0.299 * 255) = 76
        assert to_grayscale(solid((255, 0, 0), shape=(1, 1))).pixels[0, 0] == 76

    def test_dimensions_preserved(self):
        gray = to_grayscale(solid((10, 20, 30), shape=(4, 7)))
        assert gray.pixels.shape == (4, 7)

    @given(st.integers(min_value=0, max_value=255))
    def test_equal_channels_identity(self, level):
        img = solid((level, level, level), shape=(2, 2))
        assert (to_grayscale(img).pixels == level).all()


class TestBinarizeFixed:
    def test_all_dark_is_signal(self):
        mask = binarize_fixed(GrayImage(np.zeros((2, 2), np.uint8)), 128)
        assert mask.pixels.all()

    def test_all_light_is_background(self):
        mask = binarize_fixed(GrayImage(np.full((2, 2), 255, np.uint8)), 128)
        assert not mask.pixels.any()

    def test_strictly_below_threshold(self):
        gray = GrayImage(np.array([[20, 150, 250]], np.uint8))
        mask = binarize_fixed(gray, 100)
        assert mask.pixels.tolist() == [[True, False, False]]

    def test_threshold_bounds(self):
        with pytest.raises(ValueError):
            binarize_fixed(GrayImage(np.zeros((1, 1), np.uint8)), 256)

    @given(
        arrays(np.uint8, (4, 5), elements=st.integers(0, 255)),
        st.integers(0, 255),
        st.integers(0, 255),
    )
    def test_monotone_in_threshold(self, pixels, t1, t2):
        low, high = sorted((t1, t2))
        gray = GrayImage(pixels)
        below = binarize_fixed(gray, low).pixels
        above = binarize_fixed(gray, high).pixels
        assert (above | below == above).all()  # below is a subset of above


def png_bytes(array, mode):
    buf = io.BytesIO()
    Image.fromarray(array, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def bmp_bytes(array, mode):
    buf = io.BytesIO()
    Image.fromarray(array, mode=mode).save(buf, format="BMP")
    return buf.getvalue()


class TestDecode:
    def test_black_white_png_loads_as_mask(self):
        data = png_bytes(np.array([[0, 255]], np.uint8), "L")
        decoded = decode_image(data)
        assert isinstance(decoded, BinaryMask)
        assert decoded.pixels.tolist() == [[True, False]]

    def test_color_png_loads_as_raster(self):
        arr = np.array([[[10, 20, 30], [200, 100, 0]]], np.uint8)
        decoded = decode_image(png_bytes(arr, "RGB"))
        assert isinstance(decoded, RasterImage)
        assert (decoded.pixels == arr).all()

    def test_gray_png_becomes_raster_with_equal_channels(self):
        decoded = decode_image(png_bytes(np.array([[7, 130]], np.uint8), "L"))
        assert isinstance(decoded, RasterImage)
        assert (decoded.pixels[..., 0] == decoded.pixels[..., 1]).all()
        assert decoded.pixels[0, 0, 0] == 7

    def test_bmp_24bit_round_trip(self):
        arr = np.array([[[1, 2, 3], [4, 5, 6]], [[7, 8, 9], [10, 11, 12]]], np.uint8)
        decoded = decode_image(bmp_bytes(arr, "RGB"))
        assert isinstance(decoded, RasterImage)
        assert (decoded.pixels == arr).all()

    def test_bmp_1bit_loads_as_mask(self):
        eight_bit = Image.fromarray(np.array([[255, 0], [0, 255]], np.uint8), mode="L")
        buf = io.BytesIO()
        eight_bit.convert("1", dither=Image.NONE).save(buf, format="BMP")
        decoded = decode_image(buf.getvalue())
        assert isinstance(decoded, BinaryMask)
        # PIL "1": True renders white; black = signal
        assert decoded.pixels.tolist() == [[False, True], [True, False]]

    def test_bmp_8bit_gray(self):
        decoded = decode_image(bmp_bytes(np.array([[50, 90]], np.uint8), "L"))
        assert isinstance(decoded, RasterImage)
        assert decoded.pixels[0, 1, 0] == 90

    def test_truncated_file_is_decode_error(self):
        data = png_bytes(np.zeros((64, 64), np.uint8) + 37, "L")
        with pytest.raises(DecodeError):
            decode_image(data[: len(data) // 2])

    def test_garbage_is_decode_error(self):
        with pytest.raises(DecodeError):
            decode_image(b"this is not an image at all")

    def test_unsupported_format_rejected(self):
        buf = io.BytesIO()
        Image.fromarray(np.zeros((2, 2), np.uint8), mode="L").save(buf, format="GIF")
        with pytest.raises(UnsupportedFormatError):
            decode_image(buf.getvalue())

    def test_unsupported_png_mode_rejected(self):
        arr = np.zeros((2, 2, 4), np.uint8)
        data = png_bytes(arr, "RGBA")
        with pytest.raises(UnsupportedFormatError):
            decode_image(data)


class TestEncode:
    @given(arrays(np.uint8, (3, 4, 3), elements=st.integers(0, 255)))
    @settings(max_examples=25)
    def test_png_round_trip_rgb(self, pixels):
        img = RasterImage(pixels)
        decoded = decode_image(encode_png(img))
        if isinstance(decoded, BinaryMask):  # all pixels happened to be pure b/w
            assert (pixels == np.where(decoded.pixels[..., None], 0, 255)).all()
        else:
            assert (decoded.pixels == pixels).all()

    def test_png_round_trip_mask(self):
        mask = BinaryMask(np.array([[True, False], [False, True]]))
        decoded = decode_image(encode_png(mask))
        assert isinstance(decoded, BinaryMask)
        assert (decoded.pixels == mask.pixels).all()

    def test_reencode_is_identity(self):
        arr = np.array([[[9, 9, 9], [250, 1, 130]]], np.uint8)
        first = decode_image(png_bytes(arr, "RGB"))
        second = decode_image(encode_png(first))
        assert (first.pixels == second.pixels).all()

    def test_bmp_reencodes_to_identical_pixels(self):
        arr = np.array([[[1, 2, 3], [4, 5, 6]]], np.uint8)
        first = decode_image(bmp_bytes(arr, "RGB"))
        second = decode_image(encode_png(first))
        assert (first.pixels == second.pixels).all()


class TestTypes:
    def test_pixels_are_immutable(self):
        img = solid((1, 2, 3))
        with pytest.raises(ValueError):
            img.pixels[0, 0, 0] = 9

    def test_zero_size_rejected(self):
        with pytest.raises(ValueError):
            GrayImage(np.zeros((0, 3), np.uint8))

    def test_shape_validated(self):
        with pytest.raises(ValueError):
            RasterImage(np.zeros((2, 2), np.uint8))
