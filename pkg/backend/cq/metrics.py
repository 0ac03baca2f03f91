"""
Метрики качества квантования.

VIF (пиксельный многомасштабный вариант), MSE / PSNR и отклики
logit(VIF) - logit(VIF_rgb), на которых строится анализ по пространствам.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .colorspace import RGB_TO_XYZ, Space, linearize_array
from .errors import (
    DimensionMismatchError,
    ImageTooSmallError,
    MissingResponseEntryError,
    UndefinedLogitError,
)
from .image import PixelImage

logger = logging.getLogger(__name__)

# ============ КОНСТАНТЫ ============

VIF_SCALES = 4
VIF_SIGMA_NSQ = 2.0
VIF_EPS = 1e-10
# Одно 11-точечное гауссово ядро на всех масштабах, sigma_s = 2^s / 2:
# 0.5, 1, 2, 4 для s = 0..3
VIF_TAPS = 11
VIF_SIGMAS = tuple(2.0 ** s / 2.0 for s in range(VIF_SCALES))
# На самом грубом масштабе (шаг 2^(S-1)) должно остаться не меньше
# полуокна + 1 пикселей, иначе отражение края становится многократным
VIF_MIN_SIZE = 2 ** (VIF_SCALES - 1) * (VIF_TAPS // 2) + 1

PEAK = 255.0
LOGIT_CLAMP = 1e-9

RESPONSE_SPACES = (Space.XYZ, Space.LUV)
VIF_MODES = ("luminance", "channels")


@dataclass(frozen=True)
class QualityReport:
    vif: float
    mse: float
    psnr: float
    wcss: float
    logit_vif: float
    space: Space
    k: int
    vif_clamped: bool = False


@dataclass
class ResponseMatrix:
    """
    Отклики y[(space, k)] = logit(VIF_space,k) - logit(VIF_rgb,k) для XYZ и LUV.

    None в values - отсутствующая ячейка; её пара (space, k) попадает в missing.
    """

    ks: Tuple[int, ...]
    values: Dict[Tuple[Space, int], Optional[float]] = field(default_factory=dict)
    missing: List[Tuple[Space, int]] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.missing

    def entry(self, space: Space, k: int) -> Optional[float]:
        return self.values.get((Space(space), k))


# ============ VIF ============

def _gaussian_taps(sigma: float) -> np.ndarray:
    x = np.arange(VIF_TAPS, dtype=np.float64) - (VIF_TAPS - 1) / 2.0
    taps = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return taps / taps.sum()


def _smooth(plane: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Сепарабельная гауссова свёртка того же размера, края отражаются."""
    out = ndimage.correlate1d(plane, taps, axis=0, mode="reflect")
    return ndimage.correlate1d(out, taps, axis=1, mode="reflect")


def vif_plane(reference: np.ndarray, distorted: np.ndarray) -> float:
    """VIF двух плоскостей float одинакового размера (не меньше 41x41)."""
    ref = np.asarray(reference, dtype=np.float64)
    dist = np.asarray(distorted, dtype=np.float64)
    if ref.shape != dist.shape:
        raise DimensionMismatchError(f"plane shapes differ: {ref.shape} vs {dist.shape}")
    if min(ref.shape) < VIF_MIN_SIZE:
        raise ImageTooSmallError(ref.shape[1], ref.shape[0], VIF_MIN_SIZE)

    num = 0.0
    den = 0.0
    for scale, sigma in enumerate(VIF_SIGMAS):
        taps = _gaussian_taps(sigma)
        if scale > 0:
            ref = _smooth(ref, taps)[::2, ::2]
            dist = _smooth(dist, taps)[::2, ::2]

        mu1 = _smooth(ref, taps)
        mu2 = _smooth(dist, taps)
        sigma1_sq = np.maximum(_smooth(ref * ref, taps) - mu1 * mu1, 0.0)
        sigma2_sq = np.maximum(_smooth(dist * dist, taps) - mu2 * mu2, 0.0)
        sigma12 = _smooth(ref * dist, taps) - mu1 * mu2

        g = sigma12 / (sigma1_sq + VIF_EPS)
        sv_sq = sigma2_sq - g * sigma12

        flat_ref = sigma1_sq < VIF_EPS
        g[flat_ref] = 0.0
        sv_sq[flat_ref] = sigma2_sq[flat_ref]
        sigma1_sq[flat_ref] = 0.0

        flat_dist = sigma2_sq < VIF_EPS
        g[flat_dist] = 0.0
        sv_sq[flat_dist] = 0.0

        negative = g < 0.0
        sv_sq[negative] = sigma2_sq[negative]
        g[negative] = 0.0
        sv_sq = np.maximum(sv_sq, VIF_EPS)

        num += float(np.sum(np.log10(1.0 + g * g * sigma1_sq / (sv_sq + VIF_SIGMA_NSQ))))
        den += float(np.sum(np.log10(1.0 + sigma1_sq / VIF_SIGMA_NSQ)))

    return float(np.clip((num + VIF_EPS) / (den + VIF_EPS), 0.0, 1.0))


def luminance_plane(img: PixelImage) -> np.ndarray:
    """Строка Y матрицы RGB->XYZ по линейному RGB, в шкале [0,255]."""
    linear = linearize_array(img.samples.astype(np.float64) / 255.0)
    return (linear @ RGB_TO_XYZ[1]) * PEAK


def _check_pair(reference: PixelImage, distorted: PixelImage) -> None:
    if not reference.same_shape(distorted):
        raise DimensionMismatchError(
            f"image dimensions differ: {reference.width}x{reference.height} "
            f"vs {distorted.width}x{distorted.height}"
        )


def vif(reference: PixelImage, distorted: PixelImage, mode: str = "luminance") -> float:
    """
    VIF в [0,1]; 1 для совпадающих изображений.

    mode="luminance" - одна плоскость яркости, "channels" - среднее
    по каналам R, G, B.
    """
    _check_pair(reference, distorted)
    if reference.short_edge < VIF_MIN_SIZE:
        raise ImageTooSmallError(reference.width, reference.height, VIF_MIN_SIZE)

    if mode == "luminance":
        return vif_plane(luminance_plane(reference), luminance_plane(distorted))
    if mode == "channels":
        ref = reference.samples.astype(np.float64)
        dist = distorted.samples.astype(np.float64)
        return float(np.mean([vif_plane(ref[..., c], dist[..., c]) for c in range(3)]))
    raise ValueError(f"unknown VIF mode {mode!r}; expected one of {VIF_MODES}")


# ============ MSE / PSNR ============

def mse(reference: PixelImage, distorted: PixelImage) -> float:
    _check_pair(reference, distorted)
    diff = reference.samples.astype(np.float64) - distorted.samples.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr_from_mse(value: float) -> float:
    if value == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / value)


def psnr(reference: PixelImage, distorted: PixelImage) -> float:
    """PSNR в дБ с пиком 255; +inf для совпадающих изображений."""
    return psnr_from_mse(mse(reference, distorted))


# ============ ОТКЛИКИ ============

def logit_vif(v: float) -> float:
    if not 0.0 < v < 1.0:
        raise UndefinedLogitError(f"logit is undefined for VIF={v!r}; value must lie strictly inside (0,1)")
    return math.log(v / (1.0 - v))


def clamp_vif(v: float) -> Tuple[float, bool]:
    """Прижать VIF внутрь [1e-9, 1 - 1e-9] перед logit."""
    clamped = min(max(v, LOGIT_CLAMP), 1.0 - LOGIT_CLAMP)
    if clamped != v:
        logger.warning("VIF %.12g clamped to %.12g before logit", v, clamped)
        return clamped, True
    return v, False


def evaluate_quality(
    reference: PixelImage,
    distorted: PixelImage,
    wcss: float,
    space: Space,
    k: int,
    vif_mode: str = "luminance",
) -> QualityReport:
    """Полный отчёт для пары оригинал / квантованное изображение."""
    value = vif(reference, distorted, vif_mode)
    safe, was_clamped = clamp_vif(value)
    error = mse(reference, distorted)
    return QualityReport(
        vif=value,
        mse=error,
        psnr=psnr_from_mse(error),
        wcss=wcss,
        logit_vif=logit_vif(safe),
        space=Space(space),
        k=k,
        vif_clamped=was_clamped,
    )


def _response_ks(vifs: Mapping[Tuple[Space, int], float], ks: Optional[Iterable[int]]) -> Tuple[int, ...]:
    if ks is not None:
        return tuple(ks)
    return tuple(sorted({k for _, k in vifs}))


def _normalized(vifs: Mapping[Tuple[Space, int], float]) -> Dict[Tuple[Space, int], float]:
    return {(Space(space), int(k)): float(v) for (space, k), v in vifs.items()}


def response_matrix(
    vifs: Mapping[Tuple[Space, int], float],
    ks: Optional[Sequence[int]] = None,
) -> ResponseMatrix:
    """
    Строгое построение: каждая пара (space, k) для rgb, xyz и luv обязана быть.

    Raises:
        MissingResponseEntryError: нет VIF для (space, k)
        UndefinedLogitError: VIF на границе [0,1]
    """
    table = _normalized(vifs)
    matrix = ResponseMatrix(ks=_response_ks(table, ks))
    for k in matrix.ks:
        for space in (Space.RGB,) + RESPONSE_SPACES:
            if (space, k) not in table:
                raise MissingResponseEntryError(space.value, k)
        baseline = logit_vif(table[(Space.RGB, k)])
        for space in RESPONSE_SPACES:
            matrix.values[(space, k)] = logit_vif(table[(space, k)]) - baseline
    return matrix


def partial_response_matrix(
    vifs: Mapping[Tuple[Space, int], float],
    ks: Optional[Sequence[int]] = None,
) -> ResponseMatrix:
    """Как response_matrix, но недостающие ячейки помечаются, а граничные VIF прижимаются."""
    table = _normalized(vifs)
    matrix = ResponseMatrix(ks=_response_ks(table, ks))
    for k in matrix.ks:
        for space in RESPONSE_SPACES:
            if (Space.RGB, k) not in table or (space, k) not in table:
                matrix.values[(space, k)] = None
                matrix.missing.append((space, k))
                continue
            base, _ = clamp_vif(table[(Space.RGB, k)])
            value, _ = clamp_vif(table[(space, k)])
            matrix.values[(space, k)] = logit_vif(value) - logit_vif(base)
    return matrix
