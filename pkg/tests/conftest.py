import numpy as np
import pytest

from eigenprint import GrayImage, database_from_images


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def random_db(rng):
    """Small random database: 5 images of 6x7."""
    imgs = [GrayImage(rng.uniform(0.0, 1.0, (6, 7))) for _ in range(5)]
    return database_from_images(imgs)


def make_step(height=16, width=16, at=None) -> GrayImage:
    """Vertical unit step: zeros on the left, ones from column `at` on."""
    at = width // 2 if at is None else at
    pixels = np.zeros((height, width))
    pixels[:, at:] = 1.0
    return GrayImage(pixels)
