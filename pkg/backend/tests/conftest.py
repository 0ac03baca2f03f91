"""
Общие фикстуры тестов.
"""

import os
import tempfile
from pathlib import Path

# До импорта config: отдельная база для тестов
os.environ.setdefault(
    "DATABASE_URL",
    f"sqlite+aiosqlite:///{Path(tempfile.gettempdir()) / f'cq-test-{os.getpid()}.db'}",
)
os.environ.setdefault("CQ_THREADS", "2")

import numpy as np
import pytest

from cq.image import PixelImage, encode


def make_textured(width: int = 96, height: int = 80) -> PixelImage:
    """Гладкая цветная текстура: синусоиды разной частоты по каналам."""
    y, x = np.mgrid[0:height, 0:width].astype(np.float64)
    r = 128 + 100 * np.sin(x / 5.0) * np.cos(y / 7.0)
    g = 128 + 90 * np.sin((x + y) / 9.0)
    b = 128 + 80 * np.cos(x / 4.0 - y / 11.0)
    samples = np.clip(np.stack([r, g, b], axis=-1), 0, 255).round().astype(np.uint8)
    return PixelImage.from_array(samples)


def make_four_color(width: int = 8, height: int = 6) -> PixelImage:
    colors = np.array([[255, 0, 0], [0, 128, 255], [20, 200, 40], [250, 250, 250]], dtype=np.uint8)
    labels = (np.arange(width * height) * 7 // 3) % 4
    return PixelImage.from_array(colors[labels].reshape(height, width, 3))


def make_constant(width: int = 64, height: int = 64, color=(90, 140, 200)) -> PixelImage:
    return PixelImage.from_array(np.tile(np.array(color, dtype=np.uint8), (height, width, 1)))


@pytest.fixture
def textured_image() -> PixelImage:
    return make_textured()


@pytest.fixture
def four_color_image() -> PixelImage:
    return make_four_color()


@pytest.fixture
def constant_image() -> PixelImage:
    return make_constant()


@pytest.fixture
def write_image(tmp_path):
    """Сохранить PixelImage в tmp_path и вернуть путь."""
    def _write(img: PixelImage, name: str = "img.png") -> Path:
        return encode(img, tmp_path / name)
    return _write
