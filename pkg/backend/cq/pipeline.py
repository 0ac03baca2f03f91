"""
Конвейер: квантование -> восстановление -> оценка -> профиль изображения.

Пакетный прогон по набору изображений, пространств и k с выгрузкой
результатов в CSV.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from .colorspace import ColorSpace, ScalingMode, Space, convert_pixels, normalize_components
from .errors import QuantizationError
from .image import PathLike, PixelImage, decode, encode
from .imagestats import PROFILE_COLUMNS, ImageProfile, characterize_image
from .metrics import QualityReport, ResponseMatrix, evaluate_quality, partial_response_matrix
from .quantizer import Assignment, KMeansConfig, Palette, PixelDataset, run_kmeans, reconstruct

logger = logging.getLogger(__name__)

# ============ КОНСТАНТЫ ============

CSV_COLUMNS = [
    "image", "I", "J", "space", "k", "seed", "wcss", "vif", "psnr",
    "logit_vif", "y_xyz_or_luv", "clamped", "ms",
]
RESULTS_FILE = "results.csv"
PROFILES_FILE = "profiles.csv"
TALLY_FILE = "tally.csv"
RESPONSES_FILE = "responses.csv"
IMAGES_DIR = "images"

DEFAULT_SPACES = (Space.RGB, Space.XYZ, Space.LUV)
DEFAULT_KS = (8, 16, 32, 64)


class ExperimentRow(BaseModel):
    """Одна строка результатов: (image, space, k)."""

    image: str = Field(..., description="Идентификатор изображения (имя файла без расширения)")
    I: int = Field(..., description="Короткая сторона, пикселей")
    J: int = Field(..., description="Длинная сторона, пикселей")
    space: str = Field(..., description="rgb | xyz | luv | hcl")
    k: int = Field(..., ge=1)
    seed: int = Field(..., ge=0)
    wcss: float
    vif: float
    psnr: float = Field(..., description="дБ; inf для совпадающих изображений")
    logit_vif: float
    y_xyz_or_luv: Optional[float] = Field(None, description="logit(VIF) - logit(VIF_rgb) при том же k")
    clamped: int = Field(0, ge=0, description="Пикселей с цветом палитры вне гамута")
    ms: float = Field(0.0, ge=0, description="Время ячейки, мс")


@dataclass
class QuantizedImage:
    image: PixelImage
    palette: Palette
    assignment: Assignment
    wcss: float
    clamped: int
    iterations: int
    converged: bool


@dataclass
class ExperimentOutcome:
    rows: List[ExperimentRow] = field(default_factory=list)
    profiles: Dict[str, ImageProfile] = field(default_factory=dict)
    responses: Dict[str, ResponseMatrix] = field(default_factory=dict)
    failed: List[str] = field(default_factory=list)
    tally: Dict[str, Dict[int, int]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failed


# ============ ОДНО ИЗОБРАЖЕНИЕ ============

def quantize_image(
    img: PixelImage,
    space: Union[Space, str],
    cfg: KMeansConfig,
    scaling: Union[ScalingMode, str] = ScalingMode.FIXED,
) -> QuantizedImage:
    """Перевести в пространство, нормировать, k-means, восстановить gamma RGB."""
    space = Space(space)
    target = space.color_space
    values, _ = convert_pixels(img.as_unit_float(), ColorSpace.GAMMA_RGB, target)
    normalized, params = normalize_components(values, target, ScalingMode(scaling))

    result = run_kmeans(PixelDataset(normalized, target, params), cfg)
    out, clamped = reconstruct((img.width, img.height), result.assignment, result.palette)
    return QuantizedImage(
        image=out,
        palette=result.palette,
        assignment=result.assignment,
        wcss=result.wcss,
        clamped=clamped,
        iterations=result.iterations,
        converged=result.converged,
    )


def image_id(path: PathLike) -> str:
    return Path(path).stem


def output_image_path(out_dir: Path, image: str, space: Space, k: int) -> Path:
    return out_dir / IMAGES_DIR / f"{image}_{space.value}_k{k}.png"


# ============ ПАКЕТНЫЙ ПРОГОН ============

@dataclass
class _CellResult:
    space: Space
    k: int
    quantized: QuantizedImage
    report: QualityReport
    ms: float


def _run_cell(
    img: PixelImage,
    space: Space,
    k: int,
    seed: int,
    restarts: Optional[int],
    max_iterations: int,
    scaling: ScalingMode,
    vif_mode: str,
    record_runtime: bool,
) -> _CellResult:
    started = time.perf_counter()
    cfg = KMeansConfig(k=k, max_iterations=max_iterations, restarts=restarts, seed=seed)
    quantized = quantize_image(img, space, cfg, scaling)
    report = evaluate_quality(img, quantized.image, quantized.wcss, space, k, vif_mode)
    ms = (time.perf_counter() - started) * 1000.0 if record_runtime else 0.0
    return _CellResult(space=space, k=k, quantized=quantized, report=report, ms=ms)


def _rows_for_image(name: str, img: PixelImage, cells: List[_CellResult], seed: int) -> List[ExperimentRow]:
    baseline = {c.k: c.report.logit_vif for c in cells if c.space is Space.RGB}
    rows = []
    for cell in cells:
        y = None
        if cell.space is not Space.RGB and cell.k in baseline:
            y = cell.report.logit_vif - baseline[cell.k]
        rows.append(ExperimentRow(
            image=name,
            I=img.short_edge,
            J=img.long_edge,
            space=cell.space.value,
            k=cell.k,
            seed=seed,
            wcss=cell.report.wcss,
            vif=cell.report.vif,
            psnr=cell.report.psnr,
            logit_vif=cell.report.logit_vif,
            y_xyz_or_luv=y,
            clamped=cell.quantized.clamped,
            ms=cell.ms,
        ))
    return rows


def run_experiment(
    images: Sequence[PathLike],
    spaces: Sequence[Union[Space, str]] = DEFAULT_SPACES,
    ks: Sequence[int] = DEFAULT_KS,
    seed: int = 0,
    *,
    out_dir: Optional[PathLike] = None,
    restarts: Optional[int] = None,
    max_iterations: int = 200,
    scaling: Union[ScalingMode, str] = ScalingMode.FIXED,
    vif_mode: str = "luminance",
    exclude_achromatic: bool = False,
    subsample_threshold: Optional[int] = None,
    subsample_size: int = 10_000_000,
    threads: int = 1,
    record_runtime: bool = True,
) -> ExperimentOutcome:
    """
    Полный перебор (image, space, k).

    Ячейки одного изображения считаются в пуле потоков; строки, картинки
    и CSV пишет только вызывающий поток. Ошибка на изображении
    логируется, изображение пропускается, прогон продолжается.
    """
    if not images or not spaces or not ks:
        raise QuantizationError("images, spaces and ks must all be non-empty")

    spaces = [Space(s) for s in spaces]
    ks = [int(k) for k in ks]
    scaling = ScalingMode(scaling)
    target_dir = Path(out_dir) if out_dir is not None else None
    outcome = ExperimentOutcome()

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for index, path in enumerate(images, start=1):
            name = image_id(path)
            logger.info("[%d/%d] %s", index, len(images), name)
            try:
                img = decode(path)
                profile = characterize_image(
                    img,
                    exclude_achromatic=exclude_achromatic,
                    subsample_threshold=subsample_threshold,
                    subsample_size=subsample_size,
                    seed=seed,
                )
                futures = [
                    pool.submit(
                        _run_cell, img, space, k, seed, restarts, max_iterations,
                        scaling, vif_mode, record_runtime,
                    )
                    for space in spaces
                    for k in ks
                ]
                cells = [f.result() for f in futures]
                if target_dir is not None:
                    for cell in cells:
                        encode(cell.quantized.image, output_image_path(target_dir, name, cell.space, cell.k))
            except (QuantizationError, OSError) as e:
                logger.error("Image %s failed: %s", name, e, exc_info=True)
                outcome.failed.append(name)
                continue

            outcome.profiles[name] = profile
            outcome.rows.extend(_rows_for_image(name, img, cells, seed))
            outcome.responses[name] = partial_response_matrix(
                {(c.space, c.k): c.report.vif for c in cells if c.space is not Space.HCL}, ks
            )

    outcome.tally = best_space_tally(outcome.rows, spaces, ks)

    if target_dir is not None:
        target_dir.mkdir(parents=True, exist_ok=True)
        write_rows(outcome.rows, target_dir / RESULTS_FILE)
        write_profiles(outcome.profiles, target_dir / PROFILES_FILE)
        write_tally(outcome.tally, target_dir / TALLY_FILE)
        write_responses(outcome.responses, target_dir / RESPONSES_FILE)

    logger.info(
        "Experiment finished: %d rows, %d images ok, %d failed",
        len(outcome.rows), len(outcome.profiles), len(outcome.failed),
    )
    return outcome


def best_space_tally(
    rows: Iterable[ExperimentRow],
    spaces: Sequence[Union[Space, str]],
    ks: Sequence[int],
) -> Dict[str, Dict[int, int]]:
    """
    Сколько изображений каждое пространство выиграло по VIF при каждом k.

    При равенстве VIF побеждает пространство, стоящее раньше в spaces.
    """
    order = [Space(s).value for s in spaces]
    tally = {space: {int(k): 0 for k in ks} for space in order}
    best: Dict[Tuple[str, int], Tuple[float, int]] = {}
    for row in rows:
        if row.space not in order or row.k not in tally[row.space]:
            continue
        rank = order.index(row.space)
        key = (row.image, row.k)
        current = best.get(key)
        if current is None or row.vif > current[0] or (row.vif == current[0] and rank < current[1]):
            best[key] = (row.vif, rank)
    for (_, k), (_, rank) in best.items():
        tally[order[rank]][k] += 1
    return tally


# ============ CSV ============

def write_rows(rows: Sequence[ExperimentRow], path: PathLike) -> Path:
    path = Path(path)
    frame = pd.DataFrame([row.model_dump() for row in rows], columns=CSV_COLUMNS)
    frame.to_csv(path, index=False, encoding="utf-8")
    return path


def read_rows(path: PathLike) -> List[ExperimentRow]:
    frame = pd.read_csv(path, float_precision="round_trip", dtype={"image": str, "space": str})
    rows = []
    for raw in frame.to_dict(orient="records"):
        record = {key: value.item() if isinstance(value, np.generic) else value for key, value in raw.items()}
        y = record["y_xyz_or_luv"]
        record["y_xyz_or_luv"] = None if y is None or (isinstance(y, float) and math.isnan(y)) else float(y)
        rows.append(ExperimentRow(**record))
    return rows


def write_profiles(profiles: Mapping[str, ImageProfile], path: PathLike) -> Path:
    path = Path(path)
    records = [{"image": name, **profile.to_record()} for name, profile in profiles.items()]
    pd.DataFrame(records, columns=["image", *PROFILE_COLUMNS]).to_csv(path, index=False, encoding="utf-8")
    return path


def write_tally(tally: Mapping[str, Mapping[int, int]], path: PathLike) -> Path:
    path = Path(path)
    frame = pd.DataFrame.from_dict(tally, orient="index")
    frame.index.name = "space"
    frame.columns = [f"k{k}" for k in frame.columns]
    frame.to_csv(path, encoding="utf-8")
    return path


def write_responses(responses: Mapping[str, ResponseMatrix], path: PathLike) -> Path:
    path = Path(path)
    records = []
    for name, matrix in responses.items():
        for (space, k), value in matrix.values.items():
            records.append({
                "image": name,
                "space": space.value,
                "k": k,
                "y": value,
                "missing": (space, k) in matrix.missing,
            })
    pd.DataFrame(records, columns=["image", "space", "k", "y", "missing"]).to_csv(path, index=False, encoding="utf-8")
    return path


def profile_frame(name: str, profile: ImageProfile) -> pd.DataFrame:
    return pd.DataFrame([{"image": name, **profile.to_record()}], columns=["image", *PROFILE_COLUMNS])


def summarize(outcome: ExperimentOutcome) -> str:
    mean_vif = f"{np.mean([row.vif for row in outcome.rows]):.4f}" if outcome.rows else "n/a"
    return (
        f"{len(outcome.rows)} rows, {len(outcome.profiles)} images, "
        f"{len(outcome.failed)} failed, mean VIF {mean_vif}"
    )
