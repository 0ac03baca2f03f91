"""
k-means квантование цвета.

Посев k-means++, итерации Hartigan-Wong (optimal transfer / quick
transfer, см. kernels.py), выбор лучшего из нескольких перезапусков и
восстановление изображения по палитре.

Генератор: numpy PCG64; сид каждого перезапуска порождается через
SeedSequence(seed).spawn(restarts), поэтому палитры воспроизводятся
на любых платформах.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import kernels
from .colorspace import ColorSpace, NormalizationParams, convert_pixels, denormalize_components
from .errors import (
    LabelRangeError,
    NonFiniteInputError,
    QuantizationError,
    TooFewColorsError,
    WcssIncreaseError,
)
from .image import PixelImage

logger = logging.getLogger(__name__)

# ============ КОНСТАНТЫ ============

MAX_SEED = 2**64 - 1
SMALL_K_RESTARTS = 10
LARGE_K_RESTARTS = 3
LARGE_K_THRESHOLD = 64
WCSS_RELATIVE_TOLERANCE = 1e-9


def default_restarts(k: int) -> int:
    """10 перезапусков при k <= 64, иначе 3."""
    return SMALL_K_RESTARTS if k <= LARGE_K_THRESHOLD else LARGE_K_RESTARTS


@dataclass
class PixelDataset:
    """Нормированное облако пикселей (n, 3) в [0,1]."""

    points: np.ndarray
    space: ColorSpace
    params: NormalizationParams

    def __post_init__(self) -> None:
        points = np.ascontiguousarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3 or points.shape[0] < 1:
            raise QuantizationError(f"expected a non-empty (n, 3) point array, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise NonFiniteInputError("pixel dataset contains non-finite components")
        self.points = points

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass
class Palette:
    centroids: np.ndarray
    space: ColorSpace
    params: NormalizationParams

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


@dataclass
class Assignment:
    labels: np.ndarray
    counts: np.ndarray

    @property
    def k(self) -> int:
        return self.counts.shape[0]


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    max_iterations: int = 200
    restarts: Optional[int] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise QuantizationError(f"k must be positive, got {self.k}")
        if self.max_iterations < 1:
            raise QuantizationError("max_iterations must be positive")
        if self.restarts is not None and self.restarts < 1:
            raise QuantizationError("restarts must be at least 1")
        if not 0 <= self.seed <= MAX_SEED:
            raise QuantizationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def effective_restarts(self) -> int:
        return self.restarts if self.restarts is not None else default_restarts(self.k)


@dataclass
class KMeansResult:
    palette: Palette
    assignment: Assignment
    wcss: float
    iterations: int
    converged: bool
    restart: int
    history: List[float] = field(default_factory=list)


def count_distinct_colors(points: np.ndarray) -> int:
    return int(np.unique(points, axis=0).shape[0])


def restart_generators(seed: int, restarts: int) -> List[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(restarts)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


def kmeanspp_init(data: PixelDataset, k: int, rng: np.random.Generator) -> Palette:
    """
    Посев k-means++: первый центр равновероятно, остальные с весом D².

    Если суммарный D² обнулился раньше, чем набрано k центров, различных
    цветов меньше k.
    """
    points = data.points
    n = data.n
    if k > n:
        raise TooFewColorsError(k, count_distinct_colors(points))

    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = np.sum((points - points[chosen[0]]) ** 2, axis=1)

    for j in range(1, k):
        cumulative = np.cumsum(d2)
        total = cumulative[-1]
        if total <= 0.0:
            raise TooFewColorsError(k, count_distinct_colors(points))
        # side="right": точки с нулевым весом не выбираются
        idx = int(np.searchsorted(cumulative, rng.random() * total, side="right"))
        chosen[j] = min(idx, n - 1)
        d2 = np.minimum(d2, np.sum((points - points[chosen[j]]) ** 2, axis=1))

    return Palette(centroids=points[chosen].copy(), space=data.space, params=data.params)


def _check_history(history: np.ndarray) -> None:
    for prev, cur in zip(history[:-1], history[1:]):
        if cur > prev + WCSS_RELATIVE_TOLERANCE * max(1.0, abs(prev)):
            raise WcssIncreaseError(f"WCSS increased between iterations: {prev!r} -> {cur!r}")


def _repair_empty_clusters(points: np.ndarray, centers: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Пустой кластер получает точку, самую далёкую от своего центра."""
    k = centers.shape[0]
    centers, counts = kernels.cluster_means(points, labels, k)
    for empty in np.flatnonzero(counts == 0):
        dist = np.sum((points - centers[labels]) ** 2, axis=1)
        dist[counts[labels] <= 1] = -1.0
        far = int(np.argmax(dist))
        logger.debug("Cluster %d emptied; reseeded with point %d", empty, far)
        labels[far] = empty
        centers, counts = kernels.cluster_means(points, labels, k)
    return centers, labels


def _single_run(data: PixelDataset, cfg: KMeansConfig, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, float, int, bool, List[float]]:
    seeds = kmeanspp_init(data, cfg.k, rng)
    points = data.points

    if cfg.k == 1:
        labels = np.zeros(data.n, dtype=np.int64)
        centers = points.mean(axis=0, keepdims=True)
        wcss = float(kernels.labelled_wcss(points, centers, labels))
        return centers, labels, wcss, 0, True, [wcss]

    centers, labels, counts, wcss, iterations, status, history, history_len = kernels.hartigan_wong(
        points, seeds.centroids, cfg.max_iterations
    )
    history = np.asarray(history[:history_len])
    _check_history(history)

    if status == kernels.EMPTY_CLUSTER or np.any(counts == 0):
        centers, labels = _repair_empty_clusters(points, centers, labels)
        wcss = kernels.labelled_wcss(points, centers, labels)
    if status == kernels.ITERATION_CAP:
        logger.warning("k-means hit the iteration cap (%d) for k=%d", cfg.max_iterations, cfg.k)

    return centers, labels, float(wcss), int(iterations), status == kernels.CONVERGED, history.tolist()


def run_kmeans(data: PixelDataset, cfg: KMeansConfig) -> KMeansResult:
    """Лучший по WCSS из cfg.effective_restarts запусков Hartigan-Wong."""
    if cfg.k > data.n:
        raise TooFewColorsError(cfg.k, count_distinct_colors(data.points))

    best: Optional[KMeansResult] = None
    for restart, rng in enumerate(restart_generators(cfg.seed, cfg.effective_restarts)):
        centers, labels, total, iterations, converged, history = _single_run(data, cfg, rng)
        # строгое сравнение: при равенстве побеждает более ранний запуск
        if best is None or total < best.wcss:
            counts = np.bincount(labels, minlength=cfg.k)
            best = KMeansResult(
                palette=Palette(centroids=centers, space=data.space, params=data.params),
                assignment=Assignment(labels=labels, counts=counts),
                wcss=total,
                iterations=iterations,
                converged=converged,
                restart=restart,
                history=history,
            )

    logger.debug(
        "k-means k=%d restarts=%d best_wcss=%.6g iterations=%d (restart %d)",
        cfg.k, cfg.effective_restarts, best.wcss, best.iterations, best.restart,
    )
    return best


def wcss(data: PixelDataset, palette: Palette, assignment: Assignment) -> float:
    labels = np.asarray(assignment.labels)
    if labels.shape != (data.n,):
        raise LabelRangeError(f"expected {data.n} labels, got {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= palette.k):
        raise LabelRangeError(f"labels must lie in [0, {palette.k})")
    return float(kernels.labelled_wcss(data.points, palette.centroids, labels.astype(np.int64)))


def palette_to_rgb8(palette: Palette) -> Tuple[np.ndarray, np.ndarray]:
    """Центроиды -> 8-битный gamma RGB и маска центроидов вне гамута."""
    values = denormalize_components(palette.centroids, palette.params)
    rgb, outside = convert_pixels(values, palette.space, ColorSpace.GAMMA_RGB)
    return np.rint(np.clip(rgb, 0.0, 1.0) * 255.0).astype(np.uint8), outside


def reconstruct(dims: Tuple[int, int], assignment: Assignment, palette: Palette) -> Tuple[PixelImage, int]:
    """
    Заменить каждый пиксель его центроидом.

    Args:
        dims: (width, height)

    Returns:
        (изображение в gamma RGB, число пикселей с центроидом вне гамута)
    """
    width, height = dims
    labels = np.asarray(assignment.labels)
    if labels.size != width * height:
        raise LabelRangeError(f"assignment covers {labels.size} pixels, image has {width * height}")

    colors, outside = palette_to_rgb8(palette)
    clamped = int(np.sum(np.bincount(labels, minlength=palette.k)[outside]))
    if clamped:
        logger.warning("%d pixels mapped to palette colors outside the RGB gamut", clamped)
    samples = colors[labels].reshape(height, width, 3)
    return PixelImage(width=width, height=height, samples=samples), clamped
