"""
Pydantic модели для API запросов и ответов.
"""

from datetime import datetime
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field

SpaceName = Literal["rgb", "xyz", "luv", "hcl"]


# ============ EVALUATE / CHARACTERIZE ============

class EvaluateRequest(BaseModel):
    """Пара изображений на сервере для оценки."""
    reference: str = Field(..., description="Путь к оригиналу (PNG/TIFF)")
    distorted: str = Field(..., description="Путь к квантованному изображению")
    vif_mode: Literal["luminance", "channels"] = Field("luminance", description="Плоскость VIF")


class EvaluateResponse(BaseModel):
    """Метрики качества."""
    vif: float = Field(..., description="VIF в [0,1]")
    psnr: Optional[float] = Field(None, description="PSNR, дБ; null для совпадающих изображений")
    mse: float = Field(..., description="Среднеквадратичная ошибка (8 бит)")


class CharacterizeRequest(BaseModel):
    path: str = Field(..., description="Путь к изображению на сервере")
    exclude_achromatic: bool = Field(False, description="Исключить пиксели с C = 0 из статистик тона")


class ProfileResponse(BaseModel):
    """Профиль изображения (тон / насыщенность / светлота)."""
    image: str = Field(..., description="Идентификатор изображения")
    I: int = Field(..., description="Короткая сторона")
    J: int = Field(..., description="Длинная сторона")
    hue_mean: float
    hue_resultant: float
    hue_sd: Optional[float] = Field(None, description="null при R = 0")
    hue_skewness: float
    hue_kurtosis: float
    chroma_mean: float
    chroma_sd: float
    chroma_skewness: float
    chroma_kurtosis: float
    lum_mean: float
    lum_sd: float
    lum_skewness: float
    lum_kurtosis: float
    hue_degenerate: bool
    hue_direction_undefined: bool
    chroma_degenerate: bool
    lum_degenerate: bool
    achromatic: int = Field(..., description="Пикселей с C = 0")
    achromatic_excluded: bool
    pixels: int = Field(..., description="Сколько пикселей вошло в статистики")


# ============ RUN MODELS ============

class RunRequest(BaseModel):
    """Запуск пакетного прогона."""
    images: List[str] = Field(..., min_length=1, description="Пути к изображениям на сервере")
    spaces: List[SpaceName] = Field(default_factory=lambda: ["rgb", "xyz", "luv"], min_length=1)
    ks: List[int] = Field(default_factory=lambda: [8, 16, 32, 64], min_length=1)
    seed: Optional[int] = Field(None, ge=0, lt=2**64, description="Сид (по умолчанию из настроек)")
    output_dir: Optional[str] = Field(None, description="Каталог для CSV и изображений")


class RunCreatedResponse(BaseModel):
    run_id: int = Field(..., description="ID прогона")
    status: str = Field(..., description="running | finished | failed")


class RunSummary(BaseModel):
    """Сводка по прогону."""
    id: int
    status: str
    seed: str
    spaces: List[str]
    ks: List[int]
    output_dir: Optional[str] = None
    image_count: int
    failed_images: List[str] = Field(default_factory=list)
    error: Optional[str] = None
    created_at: datetime
    finished_at: Optional[datetime] = None


class RunListResponse(BaseModel):
    runs: List[RunSummary] = Field(..., description="Прогоны, новые первыми")
    total: int = Field(..., description="Количество в ответе")


class RowItem(BaseModel):
    """Строка результатов (image, space, k)."""
    image: str
    I: int
    J: int
    space: str
    k: int
    seed: int
    wcss: float
    vif: float
    psnr: Optional[float] = Field(None, description="null = +inf")
    logit_vif: float
    y_xyz_or_luv: Optional[float] = None
    clamped: int
    ms: float


class RowsResponse(BaseModel):
    run_id: int
    rows: List[RowItem]


class ProfilesResponse(BaseModel):
    run_id: int
    profiles: List[ProfileResponse]


class TallyResponse(BaseModel):
    """Сколько изображений каждое пространство выиграло по VIF при каждом k."""
    run_id: int
    tally: Dict[str, Dict[int, int]]


# ============ COMMON ============

class ErrorResponse(BaseModel):
    """Ответ с ошибкой."""
    detail: str = Field(..., description="Описание ошибки")
    error_code: Optional[str] = Field(None, description="Код ошибки")
