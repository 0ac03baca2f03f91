"""
Статистики изображения.

Тон (H) описывается круговыми статистиками, насыщенность (C) и
светлота (L) - линейными. Углы на входе и выходе в градусах, внутри
в радианах. Круговое СКО sqrt(-2 log R) безразмерно (радианы).
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from .colorspace import ColorSpace, convert_pixels
from .errors import EmptySampleError
from .image import PixelImage

logger = logging.getLogger(__name__)

# ============ КОНСТАНТЫ ============

# 1 - R <= tol считается R = 1; R < tol - направление не определено
RESULTANT_TOLERANCE = 1e-12

PROFILE_COLUMNS = (
    "I", "J",
    "hue_mean", "hue_resultant", "hue_sd", "hue_skewness", "hue_kurtosis",
    "chroma_mean", "chroma_sd", "chroma_skewness", "chroma_kurtosis",
    "lum_mean", "lum_sd", "lum_skewness", "lum_kurtosis",
    "hue_degenerate", "hue_direction_undefined", "chroma_degenerate", "lum_degenerate",
    "achromatic", "achromatic_excluded", "pixels",
)


@dataclass(frozen=True)
class LinearSummary:
    mean: float
    sd: float
    skewness: float
    kurtosis: float
    n: int
    degenerate: bool = False


@dataclass(frozen=True)
class TrigMoment:
    cosine: float
    sine: float
    resultant: float
    direction: float
    undefined: bool = False


@dataclass(frozen=True)
class CircularSummary:
    mean_direction: float
    resultant_length: float
    circular_sd: float
    circular_skewness: float
    circular_kurtosis: float
    n: int
    degenerate: bool = False
    direction_undefined: bool = False


@dataclass(frozen=True)
class ImageProfile:
    I: int
    J: int
    hue: CircularSummary
    chroma: LinearSummary
    luminance: LinearSummary
    achromatic_count: int
    achromatic_excluded: bool
    pixels_summarized: int

    def to_record(self) -> Dict[str, Any]:
        """Плоская запись для CSV / базы (колонки PROFILE_COLUMNS)."""
        return {
            "I": self.I,
            "J": self.J,
            "hue_mean": self.hue.mean_direction,
            "hue_resultant": self.hue.resultant_length,
            "hue_sd": self.hue.circular_sd,
            "hue_skewness": self.hue.circular_skewness,
            "hue_kurtosis": self.hue.circular_kurtosis,
            "chroma_mean": self.chroma.mean,
            "chroma_sd": self.chroma.sd,
            "chroma_skewness": self.chroma.skewness,
            "chroma_kurtosis": self.chroma.kurtosis,
            "lum_mean": self.luminance.mean,
            "lum_sd": self.luminance.sd,
            "lum_skewness": self.luminance.skewness,
            "lum_kurtosis": self.luminance.kurtosis,
            "hue_degenerate": self.hue.degenerate,
            "hue_direction_undefined": self.hue.direction_undefined,
            "chroma_degenerate": self.chroma.degenerate,
            "lum_degenerate": self.luminance.degenerate,
            "achromatic": self.achromatic_count,
            "achromatic_excluded": self.achromatic_excluded,
            "pixels": self.pixels_summarized,
        }


# ============ ЛИНЕЙНЫЕ ============

def linear_summary(samples) -> LinearSummary:
    """
    Среднее, СКО (n - 1), коэффициенты асимметрии m3/m2^1.5 и
    эксцесса m4/m2^2 по центральным моментам (два прохода).
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    n = x.size
    if n == 0:
        raise EmptySampleError("linear summary of an empty sample")

    if np.all(x == x[0]):
        return LinearSummary(mean=float(x[0]), sd=0.0, skewness=0.0, kurtosis=0.0, n=n, degenerate=True)

    mean = float(np.mean(x))
    centered = x - mean
    sq = centered * centered
    m2 = float(np.mean(sq))
    m3 = float(np.mean(sq * centered))
    m4 = float(np.mean(sq * sq))
    return LinearSummary(
        mean=mean,
        sd=math.sqrt(float(np.sum(sq)) / (n - 1)),
        skewness=m3 / m2 ** 1.5,
        kurtosis=m4 / (m2 * m2),
        n=n,
    )


# ============ КРУГОВЫЕ ============

def _wrap_degrees(angle: float) -> float:
    wrapped = angle % 360.0
    return 0.0 if wrapped >= 360.0 else wrapped


def trig_moment(angles, p: int = 1) -> TrigMoment:
    """p-й тригонометрический момент выборки углов (градусы)."""
    theta = np.radians(np.asarray(angles, dtype=np.float64).ravel())
    if theta.size == 0:
        raise EmptySampleError("trigonometric moment of an empty sample")

    c = float(np.mean(np.cos(p * theta)))
    s = float(np.mean(np.sin(p * theta)))
    r = math.hypot(c, s)
    if r < RESULTANT_TOLERANCE:
        return TrigMoment(cosine=c, sine=s, resultant=r, direction=0.0, undefined=True)
    return TrigMoment(cosine=c, sine=s, resultant=r, direction=_wrap_degrees(math.degrees(math.atan2(s, c))))


def circular_summary(angles) -> CircularSummary:
    """Среднее направление, R, круговые СКО, асимметрия и эксцесс."""
    first = trig_moment(angles, 1)
    second = trig_moment(angles, 2)
    n = int(np.size(angles))

    r = first.resultant
    if 1.0 - r <= RESULTANT_TOLERANCE:
        return CircularSummary(
            mean_direction=first.direction,
            resultant_length=1.0,
            circular_sd=0.0,
            circular_skewness=0.0,
            circular_kurtosis=0.0,
            n=n,
            degenerate=True,
        )

    if first.undefined:
        # R около нуля: направления нет, моменты вокруг него не определены
        return CircularSummary(
            mean_direction=0.0,
            resultant_length=r,
            circular_sd=0.0,
            circular_skewness=0.0,
            circular_kurtosis=0.0,
            n=n,
            direction_undefined=True,
        )

    sd = math.sqrt(-2.0 * math.log(r))

    # разность приводится к (-180, 180]
    diff = (second.direction - 2.0 * first.direction) % 360.0
    if diff > 180.0:
        diff -= 360.0
    diff = math.radians(diff)

    return CircularSummary(
        mean_direction=first.direction,
        resultant_length=r,
        circular_sd=sd,
        circular_skewness=second.resultant * math.sin(diff) / (1.0 - r) ** 1.5,
        circular_kurtosis=(second.resultant * math.cos(diff) - r ** 4) / (1.0 - r) ** 2,
        n=n,
        direction_undefined=first.undefined,
    )


# ============ ПРОФИЛЬ ИЗОБРАЖЕНИЯ ============

def characterize_image(
    img: PixelImage,
    exclude_achromatic: bool = False,
    subsample_threshold: Optional[int] = None,
    subsample_size: int = 10_000_000,
    seed: int = 0,
) -> ImageProfile:
    """
    Профиль изображения: I, J и сводки H, C, L по всем пикселям.

    Пиксели с C = 0 имеют H = 0 и по умолчанию входят в выборку тона;
    exclude_achromatic убирает их. subsample_threshold включает
    равномерную выборку subsample_size пикселей для больших изображений.
    """
    if img.pixel_count == 0:
        raise EmptySampleError("cannot characterize an image without pixels")

    pixels = img.as_unit_float()
    if subsample_threshold is not None and pixels.shape[0] > subsample_threshold:
        rng = np.random.default_rng(seed)
        picked = np.sort(rng.choice(pixels.shape[0], size=min(subsample_size, pixels.shape[0]), replace=False))
        logger.info("Statistics computed on %d of %d pixels", picked.size, pixels.shape[0])
        pixels = pixels[picked]

    hcl, _ = convert_pixels(pixels, ColorSpace.GAMMA_RGB, ColorSpace.HCL)
    L, C, H = hcl[:, 0], hcl[:, 1], hcl[:, 2]

    achromatic = C == 0.0
    achromatic_count = int(np.count_nonzero(achromatic))
    hue = H
    if exclude_achromatic:
        hue = H[~achromatic]
        if hue.size == 0:
            raise EmptySampleError("no chromatic pixels left after excluding achromatic ones")

    return ImageProfile(
        I=img.short_edge,
        J=img.long_edge,
        hue=circular_summary(hue),
        chroma=linear_summary(C),
        luminance=linear_summary(L),
        achromatic_count=achromatic_count,
        achromatic_excluded=exclude_achromatic,
        pixels_summarized=int(pixels.shape[0]),
    )
