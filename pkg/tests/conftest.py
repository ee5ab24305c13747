import numpy as np
import pytest

from ecgdigitize import GrayImage, RasterImage


@pytest.fixture
def tri_modal_image():
    """Color canvas with trace-dark strokes, mid-gray grid lines, white bg."""
    px = np.full((60, 200, 3), 255, dtype=np.uint8)
    for x in range(0, 200, 20):
        px[:, x] = (150, 150, 150)
    for y in range(0, 60, 20):
        px[y, :] = (150, 150, 150)
    px[30, :] = (20, 20, 20)  # a flat dark trace line
    return RasterImage(px)


def gray_from_rows(rows) -> GrayImage:
    return GrayImage(np.asarray(rows, dtype=np.uint8))
