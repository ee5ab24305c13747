import numpy as np
import pytest

from ecgdigitize import (
    BinaryMask,
    GrayImage,
    adaptive_binarize,
    binarize_fixed,
    denoise,
    grid_detectable,
    otsu_threshold,
)
from ecgdigitize.binarize import (
    STOP_FLOOR_REACHED,
    STOP_GRID_GONE,
    STOP_NO_GRID_INITIALLY,
)

from oracles import brute_force_otsu


def gray_of_levels(levels_and_counts) -> GrayImage:
    values = []
    for level, count in levels_and_counts:
        values.extend([level] * count)
    side = int(np.ceil(np.sqrt(len(values))))
    values.extend([values[-1]] * (side * side - len(values)))
    return GrayImage(np.array(values, np.uint8).reshape(side, side))


class TestOtsu:
    def test_bimodal_half_and_half(self):
        img = gray_of_levels([(10, 50), (200, 50)])
        assert otsu_threshold(img) == 10  # zero intra-class variance; ties -> smallest t

    def test_uniform_image_degenerate(self):
        img = GrayImage(np.full((3, 3), 77, np.uint8))
        with pytest.warns(RuntimeWarning, match="degenerate"):
            assert otsu_threshold(img) == 77

    def test_tri_level_matches_brute_force(self):
        img = gray_of_levels([(20, 30), (120, 30), (240, 40)])
        hist = np.bincount(img.pixels.ravel(), minlength=256)
        assert otsu_threshold(img) == brute_force_otsu(hist.tolist())

    def test_matches_brute_force_on_random_histograms(self):
        rng = np.random.default_rng(11)
        for _ in range(150):
            hist = rng.integers(0, 40, size=256)
            hist[rng.random(256) < 0.8] = 0
            if hist.sum() == 0:
                hist[rng.integers(0, 256)] = 1
            values = np.repeat(np.arange(256, dtype=np.uint8), hist)
            img = GrayImage(values.reshape(1, -1))
            assert otsu_threshold(img) == brute_force_otsu(hist.tolist())


def grid_lines_image(line_level=20, shape=(96, 400), step=20, extra=None):
    px = np.full(shape, 255, dtype=np.uint8)
    if extra is not None:
        level, region = extra
        px[region] = level
    for x in range(0, shape[1], step):
        px[:, x] = line_level
    for y in range(0, shape[0], step):
        px[y, :] = line_level
    return GrayImage(px)


class TestAdaptiveBinarize:
    def test_no_grid_initially(self):
        # flat trace only: never >= 3 detectable lines
        px = np.full((40, 200), 255, np.uint8)
        px[20, :] = 10
        mask, trace = adaptive_binarize(GrayImage(px))
        assert trace.factors == (1.0,)
        assert trace.stop_reason == STOP_NO_GRID_INITIALLY
        assert (mask.pixels == binarize_fixed(GrayImage(px), trace.otsu_threshold).pixels).all()

    def test_floor_reached_full_schedule(self):
        # dark lines plus a mid band pull Otsu far above the line level, so
        # the grid stays detectable at every factor down to the 0.6 clamp
        img = grid_lines_image(line_level=20, extra=(100, np.s_[30:60, :]))
        mask, trace = adaptive_binarize(img)
        expected = [1.0]
        factor = 1.0
        for _ in range(10):
            factor = max(0.95 * factor, 0.6)
            expected.append(factor)
        assert trace.factors == tuple(expected)
        assert trace.factors[-1] == 0.6
        assert trace.stop_reason == STOP_FLOOR_REACHED
        assert grid_detectable(mask)

    def test_grid_gone_mid_schedule(self):
        # four intensity levels: Otsu lands above the grid level, so a few
        # reductions are needed before the grid drops out
        px = np.full((96, 400), 255, np.uint8)
        px[30:60, :] = 200
        for x in range(0, 400, 20):
            px[:, x] = 150
        for y in range(0, 96, 20):
            px[y, :] = 150
        px[70, :] = 30  # trace
        mask, trace = adaptive_binarize(GrayImage(px))
        assert trace.stop_reason == STOP_GRID_GONE
        assert len(trace.factors) > 1
        assert not grid_detectable(mask)
        assert mask.pixels[70, 5]  # trace survives

    def test_mask_sequence_monotone_shrinking(self):
        img = grid_lines_image(line_level=20, extra=(100, np.s_[30:60, :]))
        _, trace = adaptive_binarize(img)
        previous = None
        for factor in trace.factors:
            mask = binarize_fixed(img, trace.otsu_threshold * factor)
            if previous is not None:
                assert (previous | mask.pixels == previous).all()  # subset
            previous = mask.pixels

    def test_final_factor_in_documented_set(self):
        img = grid_lines_image(line_level=20, extra=(100, np.s_[30:60, :]))
        _, trace = adaptive_binarize(img)
        allowed = {1.0, 0.6}
        factor = 1.0
        for _ in range(9):
            factor *= 0.95
            allowed.add(factor)
        assert trace.final_factor in allowed

    def test_tri_modal_retention(self, tri_modal_image):
        from ecgdigitize import to_grayscale

        gray = to_grayscale(tri_modal_image)
        trace_px = gray.pixels == 20
        grid_px = gray.pixels == 150
        mask, _ = adaptive_binarize(gray)
        assert (mask.pixels & trace_px).sum() / trace_px.sum() >= 0.95
        assert (mask.pixels & grid_px).sum() / grid_px.sum() <= 0.05

    def test_trace_json_round_trip(self):
        px = np.full((40, 200), 255, np.uint8)
        px[20, :] = 10
        _, trace = adaptive_binarize(GrayImage(px))
        data = trace.to_json_dict()
        assert data["factors"] == [1.0]
        assert data["stop_reason"] == STOP_NO_GRID_INITIALLY


class TestDenoise:
    def test_speck_removed_trace_kept(self):
        m = np.zeros((20, 120), dtype=bool)
        m[10, 10:110] = True  # 100 px line
        m[3, 3] = True  # 1 px speck
        cleaned = denoise(BinaryMask(m))
        assert not cleaned.pixels[3, 3]
        assert cleaned.pixels[10, 10:110].all()

    def test_empty_mask_unchanged(self):
        m = BinaryMask(np.zeros((5, 5), bool))
        assert not denoise(m).pixels.any()

    def test_components_of_four_kept(self):
        m = np.zeros((10, 10), dtype=bool)
        m[2, 2:6] = True  # exactly 4 px
        m[7, 0:3] = True  # 3 px, removed
        cleaned = denoise(BinaryMask(m))
        assert cleaned.pixels[2, 2:6].all()
        assert not cleaned.pixels[7, 0:3].any()

    def test_never_adds_pixels(self):
        rng = np.random.default_rng(5)
        m = rng.random((30, 30)) < 0.2
        cleaned = denoise(BinaryMask(m))
        assert (cleaned.pixels & ~m).sum() == 0
