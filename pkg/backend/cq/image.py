"""
Чтение и запись изображений (PNG / TIFF, 8 бит на канал).
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DimensionMismatchError, ImageDecodeError, ImageEncodeError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# ============ КОНСТАНТЫ ============

SUPPORTED_FORMATS = {"PNG", "TIFF"}
ENCODE_FORMATS = {".png": "PNG", ".tif": "TIFF", ".tiff": "TIFF"}

# Байт глубины в IHDR: 8 сигнатура + 4 длина + 4 "IHDR" + 4 ширина + 4 высота
PNG_BIT_DEPTH_OFFSET = 24
TIFF_BITS_PER_SAMPLE = 258

ALPHA_MODES = {"RGBA", "LA", "PA", "RGBa", "La"}
EXPANDABLE_MODES = {"1", "L", "P", "RGB"}


@dataclass
class PixelImage:
    """Сетка 8-битных RGB пикселей, построчно слева направо и сверху вниз."""

    width: int
    height: int
    samples: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise DimensionMismatchError(f"image dimensions must be positive, got {self.width}x{self.height}")
        samples = np.ascontiguousarray(self.samples, dtype=np.uint8)
        if samples.shape != (self.height, self.width, 3):
            raise DimensionMismatchError(
                f"expected samples of shape ({self.height}, {self.width}, 3), got {samples.shape}"
            )
        self.samples = samples

    @classmethod
    def from_array(cls, samples: np.ndarray) -> "PixelImage":
        samples = np.asarray(samples)
        return cls(width=samples.shape[1], height=samples.shape[0], samples=samples)

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    @property
    def short_edge(self) -> int:
        return min(self.width, self.height)

    @property
    def long_edge(self) -> int:
        return max(self.width, self.height)

    def as_unit_float(self) -> np.ndarray:
        """Пиксели (N, 3) в [0,1]."""
        return self.samples.reshape(-1, 3).astype(np.float64) / 255.0

    def distinct_colors(self) -> int:
        packed = self.samples.reshape(-1, 3).astype(np.uint32)
        codes = (packed[:, 0] << 16) | (packed[:, 1] << 8) | packed[:, 2]
        return int(np.unique(codes).size)

    def same_shape(self, other: "PixelImage") -> bool:
        return self.width == other.width and self.height == other.height


def _bit_depth(path: Path, im: Image.Image) -> int:
    """Глубина канала из заголовка; Pillow молча урезает 16-битные PNG RGB до 8 бит."""
    if im.format == "PNG":
        with open(path, "rb") as fh:
            header = fh.read(PNG_BIT_DEPTH_OFFSET + 1)
        if len(header) <= PNG_BIT_DEPTH_OFFSET:
            raise ImageDecodeError(f"{path}: truncated PNG header")
        return header[PNG_BIT_DEPTH_OFFSET]

    bits = im.tag_v2.get(TIFF_BITS_PER_SAMPLE, 8)
    if isinstance(bits, (tuple, list)):
        return max(int(b) for b in bits)
    return int(bits)


def decode(path: PathLike) -> PixelImage:
    """
    Прочитать PNG или TIFF без потерь.

    Альфа-канал отбрасывается с предупреждением, серые и палитровые
    изображения разворачиваются в RGB.
    """
    path = Path(path)
    if not path.is_file():
        raise ImageDecodeError(f"{path}: file not found")

    try:
        with Image.open(path) as im:
            if im.format not in SUPPORTED_FORMATS:
                raise ImageDecodeError(f"{path}: unsupported format {im.format}")

            depth = _bit_depth(path, im)
            if depth > 8:
                raise ImageDecodeError(f"{path}: unsupported bit depth {depth}")

            im.load()
            mode = im.mode
            if mode in ALPHA_MODES or (mode == "P" and "transparency" in im.info):
                logger.warning("%s: alpha channel discarded", path)
                rgb = im.convert("RGBA").convert("RGB") if mode == "P" else im.convert("RGB")
            elif mode in EXPANDABLE_MODES:
                rgb = im.convert("RGB")
            else:
                raise ImageDecodeError(f"{path}: unsupported colorspace {mode}")

            samples = np.array(rgb, dtype=np.uint8)
    except ImageDecodeError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as e:
        raise ImageDecodeError(f"{path}: {e}") from e

    return PixelImage.from_array(samples)


def encode(img: PixelImage, path: PathLike) -> Path:
    """Записать PNG или TIFF (по расширению) без потерь."""
    path = Path(path)
    fmt = ENCODE_FORMATS.get(path.suffix.lower())
    if fmt is None:
        raise ImageEncodeError(f"{path}: unsupported extension {path.suffix or '(none)'}")

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(img.samples, mode="RGB").save(path, format=fmt)
    except OSError as e:
        raise ImageEncodeError(f"{path}: {e}") from e
    return path
