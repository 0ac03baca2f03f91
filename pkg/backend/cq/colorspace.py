"""
Цветовые пространства.

Точные обратимые преобразования между gamma RGB, линейным RGB, CIE-XYZ
(с хроматичностью xyY), CIE-LUV и HCL при белой точке D65 и
наблюдателе 2°, плюс нормировка компонент в [0,1].

Функции над ColorTriple проверяют пространство; векторные *_array
функции работают с массивами формы (..., 3) и используются
квантователем, метриками и статистиками.

Порядок компонент: RGB -> (R, G, B), XYZ -> (X, Y, Z),
LUV -> (L, u, v), HCL -> (L, C, H).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from .errors import ColorDomainError, SpaceMismatchError

logger = logging.getLogger(__name__)


# ============ КОНСТАНТЫ ============

# sRGB -> XYZ, 7 значащих цифр
RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ],
    dtype=np.float64,
)
# Обратная матрица считается один раз из напечатанной прямой
XYZ_TO_RGB = np.linalg.inv(RGB_TO_XYZ)
XYZ_ROW_SUMS = RGB_TO_XYZ.sum(axis=1)

SRGB_BREAKPOINT = 0.04045
SRGB_LINEAR_BREAKPOINT = SRGB_BREAKPOINT / 12.92

# XYZ из матрицы лежит в шкале 0..~1, белая точка в шкале 0..100
XYZ_SCALE = 100.0

LUV_KNOT = (6.0 / 29.0) ** 3
LUV_LOWER_SLOPE = (29.0 / 3.0) ** 3

GAMUT_TOLERANCE = 1e-9
SCALING_TOLERANCE = 1e-6

LUV_NOMINAL_LOWER = np.array([0.0, -100.0, -100.0])
LUV_NOMINAL_UPPER = np.array([100.0, 100.0, 100.0])


class ColorSpace(str, Enum):
    """Пространство, в котором лежит тройка."""

    GAMMA_RGB = "GammaRGB"
    LINEAR_RGB = "LinearRGB"
    XYZ = "XYZ"
    LUV = "LUV"
    HCL = "HCL"


# Цепочка преобразований; соседние элементы связаны прямым/обратным шагом
CHAIN = (ColorSpace.GAMMA_RGB, ColorSpace.LINEAR_RGB, ColorSpace.XYZ, ColorSpace.LUV, ColorSpace.HCL)


class ScalingMode(str, Enum):
    FIXED = "fixed"
    MINMAX = "minmax"


@dataclass(frozen=True)
class WhitePoint:
    """Эталонная белая точка (Xr, Yr, Zr в шкале 0..100) и её (u′, v′)."""

    Xr: float
    Yr: float
    Zr: float
    ur_prime: float
    vr_prime: float

    def reference_xyz(self) -> "ColorTriple":
        """XYZ белого в шкале матрицы (Y = 1) с хроматичностью ровно (u′r, v′r)."""
        u, v = self.ur_prime, self.vr_prime
        return ColorTriple(
            9.0 * u / (4.0 * v),
            1.0,
            (12.0 - 3.0 * u - 20.0 * v) / (4.0 * v),
            ColorSpace.XYZ,
        )

    def reference_array(self) -> np.ndarray:
        t = self.reference_xyz()
        return np.array([t.c0, t.c1, t.c2])


D65 = WhitePoint(Xr=95.5, Yr=100.0, Zr=108.9, ur_prime=0.19873, vr_prime=0.46821)


@dataclass(frozen=True)
class ColorTriple:
    c0: float
    c1: float
    c2: float
    space: ColorSpace
    out_of_gamut: bool = False

    def as_array(self) -> np.ndarray:
        return np.array([self.c0, self.c1, self.c2], dtype=np.float64)

    @classmethod
    def from_array(cls, values: np.ndarray, space: ColorSpace, out_of_gamut: bool = False) -> "ColorTriple":
        return cls(float(values[0]), float(values[1]), float(values[2]), space, bool(out_of_gamut))


@dataclass(frozen=True)
class Chromaticity2D:
    """Хроматичность xy; Y сохраняется для полного xyY."""

    x: float
    y: float
    Y: float = 0.0

    @property
    def z(self) -> float:
        return 1.0 - self.x - self.y


@dataclass(frozen=True)
class NormalizationParams:
    """Аффинное отображение компонент в [0,1] и обратно."""

    space: ColorSpace
    mode: ScalingMode
    lower: Tuple[float, float, float]
    upper: Tuple[float, float, float]
    clamped: int = 0

    @property
    def span(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)


# ============ ВЕКТОРНЫЕ ЯДРА ============

def _check_unit_range(values: np.ndarray, what: str) -> None:
    if not np.all((values >= 0.0) & (values <= 1.0)):
        raise ColorDomainError(f"{what}: channel values must lie in [0,1]")


def linearize_array(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    _check_unit_range(values, "srgb_linearize")
    return np.where(
        values <= SRGB_BREAKPOINT,
        values / 12.92,
        ((values + 0.055) / 1.055) ** 2.4,
    )


def delinearize_array(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    _check_unit_range(values, "srgb_delinearize")
    encoded = np.where(
        values <= SRGB_LINEAR_BREAKPOINT,
        values * 12.92,
        1.055 * np.power(values, 1.0 / 2.4) - 0.055,
    )
    return np.clip(encoded, 0.0, 1.0)


def rgb_to_xyz_array(linear: np.ndarray) -> np.ndarray:
    return np.asarray(linear, dtype=np.float64) @ RGB_TO_XYZ.T


def xyz_to_rgb_array(xyz: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """XYZ -> линейный RGB с обрезкой в [0,1]; вторым элементом маска out-of-gamut."""
    linear = np.asarray(xyz, dtype=np.float64) @ XYZ_TO_RGB.T
    outside = np.any((linear < -GAMUT_TOLERANCE) | (linear > 1.0 + GAMUT_TOLERANCE), axis=-1)
    return np.clip(linear, 0.0, 1.0), outside


def xyz_to_luv_array(xyz: np.ndarray, white: WhitePoint = D65) -> np.ndarray:
    xyz = np.asarray(xyz, dtype=np.float64)
    X, Y, Z = xyz[..., 0], xyz[..., 1], xyz[..., 2]

    ratio = Y * XYZ_SCALE / white.Yr
    L = np.where(ratio > LUV_KNOT, 116.0 * np.cbrt(ratio) - 16.0, LUV_LOWER_SLOPE * ratio)

    denom = X + 15.0 * Y + 3.0 * Z
    black = denom <= 0.0
    safe = np.where(black, 1.0, denom)
    u_prime = np.where(black, white.ur_prime, 4.0 * X / safe)
    v_prime = np.where(black, white.vr_prime, 9.0 * Y / safe)

    u = 13.0 * L * (u_prime - white.ur_prime)
    v = 13.0 * L * (v_prime - white.vr_prime)
    return np.stack([L, u, v], axis=-1)


def luv_to_xyz_array(luv: np.ndarray, white: WhitePoint = D65) -> np.ndarray:
    luv = np.asarray(luv, dtype=np.float64)
    L, u, v = luv[..., 0], luv[..., 1], luv[..., 2]

    Y100 = np.where(L > 8.0, white.Yr * ((L + 16.0) / 116.0) ** 3, white.Yr * L / LUV_LOWER_SLOPE)
    Y = Y100 / XYZ_SCALE

    lit = L > 0.0
    thirteen_l = np.where(lit, 13.0 * L, 1.0)
    u_prime = u / thirteen_l + white.ur_prime
    v_prime = v / thirteen_l + white.vr_prime
    valid = lit & (v_prime != 0.0)
    v_safe = np.where(valid, v_prime, 1.0)

    X = np.where(valid, Y * 9.0 * u_prime / (4.0 * v_safe), 0.0)
    Z = np.where(valid, Y * (12.0 - 3.0 * u_prime - 20.0 * v_prime) / (4.0 * v_safe), 0.0)
    Y = np.where(lit, Y, 0.0)
    return np.stack([X, Y, Z], axis=-1)


def luv_to_hcl_array(luv: np.ndarray) -> np.ndarray:
    luv = np.asarray(luv, dtype=np.float64)
    L, u, v = luv[..., 0], luv[..., 1], luv[..., 2]
    C = np.hypot(u, v)
    H = np.mod(np.degrees(np.arctan2(v, u)), 360.0)
    # mod от -0 или крошечного минуса даёт ровно 360
    H = np.where(H >= 360.0, 0.0, H)
    H = np.where(C == 0.0, 0.0, H)
    return np.stack([L, C, H], axis=-1)


def hcl_to_luv_array(hcl: np.ndarray) -> np.ndarray:
    hcl = np.asarray(hcl, dtype=np.float64)
    L, C, H = hcl[..., 0], hcl[..., 1], hcl[..., 2]
    rad = np.radians(H)
    return np.stack([L, C * np.cos(rad), C * np.sin(rad)], axis=-1)


def _step_forward(values: np.ndarray, source: ColorSpace, white: WhitePoint) -> np.ndarray:
    if source is ColorSpace.GAMMA_RGB:
        return linearize_array(values)
    if source is ColorSpace.LINEAR_RGB:
        return rgb_to_xyz_array(values)
    if source is ColorSpace.XYZ:
        return xyz_to_luv_array(values, white)
    return luv_to_hcl_array(values)


def _step_backward(values: np.ndarray, source: ColorSpace, white: WhitePoint) -> Tuple[np.ndarray, np.ndarray]:
    no_flags = np.zeros(values.shape[:-1], dtype=bool)
    if source is ColorSpace.HCL:
        return hcl_to_luv_array(values), no_flags
    if source is ColorSpace.LUV:
        return luv_to_xyz_array(values, white), no_flags
    if source is ColorSpace.XYZ:
        return xyz_to_rgb_array(values)
    # Ошибки округления после обрезки гамута
    return delinearize_array(np.clip(values, 0.0, 1.0)), no_flags


def convert_pixels(
    pixels: np.ndarray,
    source: ColorSpace,
    target: ColorSpace,
    white: WhitePoint = D65,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Перевести массив (..., 3) между пространствами цепочки.

    Returns:
        (массив в target, маска пикселей, обрезанных в гамут RGB)
    """
    values = np.asarray(pixels, dtype=np.float64)
    out_of_gamut = np.zeros(values.shape[:-1], dtype=bool)
    start, end = CHAIN.index(source), CHAIN.index(target)

    if start <= end:
        for space in CHAIN[start:end]:
            values = _step_forward(values, space, white)
    else:
        for space in reversed(CHAIN[end + 1:start + 1]):
            values, flags = _step_backward(values, space, white)
            out_of_gamut |= flags
    return values, out_of_gamut


# ============ ОПЕРАЦИИ НАД ТРОЙКАМИ ============

def _require(t: ColorTriple, space: ColorSpace, op: str) -> None:
    if t.space is not space:
        raise SpaceMismatchError(f"{op} expects a {space.value} triple, got {t.space.value}")


def srgb_linearize(channel: float) -> float:
    return float(linearize_array(np.float64(channel)))


def srgb_delinearize(channel: float) -> float:
    return float(delinearize_array(np.float64(channel)))


def rgb_to_xyz(t: ColorTriple) -> ColorTriple:
    _require(t, ColorSpace.LINEAR_RGB, "rgb_to_xyz")
    _check_unit_range(t.as_array(), "rgb_to_xyz")
    return ColorTriple.from_array(rgb_to_xyz_array(t.as_array()), ColorSpace.XYZ)


def xyz_to_rgb(t: ColorTriple) -> ColorTriple:
    _require(t, ColorSpace.XYZ, "xyz_to_rgb")
    linear, outside = xyz_to_rgb_array(t.as_array())
    if outside:
        logger.debug("XYZ triple %s clamped into the RGB gamut", t)
    return ColorTriple.from_array(linear, ColorSpace.LINEAR_RGB, out_of_gamut=bool(outside))


def xyz_to_xyy(t: ColorTriple, white: WhitePoint = D65) -> Chromaticity2D:
    """Хроматичность xy; у чёрного (X+Y+Z = 0) берётся хроматичность белой точки."""
    _require(t, ColorSpace.XYZ, "xyz_to_xyy")
    total = t.c0 + t.c1 + t.c2
    if total <= 0.0:
        ref = white.reference_array()
        return Chromaticity2D(ref[0] / ref.sum(), ref[1] / ref.sum(), 0.0)
    return Chromaticity2D(t.c0 / total, t.c1 / total, t.c1)


def xyz_to_luv(t: ColorTriple, white: WhitePoint = D65) -> ColorTriple:
    _require(t, ColorSpace.XYZ, "xyz_to_luv")
    return ColorTriple.from_array(xyz_to_luv_array(t.as_array(), white), ColorSpace.LUV)


def luv_to_xyz(t: ColorTriple, white: WhitePoint = D65) -> ColorTriple:
    _require(t, ColorSpace.LUV, "luv_to_xyz")
    return ColorTriple.from_array(luv_to_xyz_array(t.as_array(), white), ColorSpace.XYZ)


def luv_to_hcl(t: ColorTriple) -> ColorTriple:
    _require(t, ColorSpace.LUV, "luv_to_hcl")
    return ColorTriple.from_array(luv_to_hcl_array(t.as_array()), ColorSpace.HCL)


def hcl_to_luv(t: ColorTriple) -> ColorTriple:
    _require(t, ColorSpace.HCL, "hcl_to_luv")
    if t.c1 < 0.0:
        raise ColorDomainError("hcl_to_luv: chroma must be non-negative")
    return ColorTriple.from_array(hcl_to_luv_array(t.as_array()), ColorSpace.LUV)


# ============ НОРМИРОВКА ============

def nominal_range(space: ColorSpace) -> Tuple[np.ndarray, np.ndarray]:
    """Фиксированный номинальный диапазон компонент пространства."""
    if space in (ColorSpace.GAMMA_RGB, ColorSpace.LINEAR_RGB):
        return np.zeros(3), np.ones(3)
    if space is ColorSpace.XYZ:
        return np.zeros(3), XYZ_ROW_SUMS.copy()
    if space is ColorSpace.LUV:
        return LUV_NOMINAL_LOWER.copy(), LUV_NOMINAL_UPPER.copy()
    raise SpaceMismatchError(f"no nominal range for {space.value}; quantize HCL as LUV")


def normalize_components(
    pixels: np.ndarray,
    space: ColorSpace,
    mode: ScalingMode = ScalingMode.FIXED,
) -> Tuple[np.ndarray, NormalizationParams]:
    """
    Отобразить каждую компоненту в [0,1].

    FIXED берёт номинальный диапазон пространства, MINMAX - минимум и
    максимум компоненты по изображению. Значения вне диапазона
    обрезаются, их число пишется в params.clamped.
    """
    values = np.asarray(pixels, dtype=np.float64)
    mode = ScalingMode(mode)

    if mode is ScalingMode.FIXED:
        lower, upper = nominal_range(space)
    else:
        flat = values.reshape(-1, 3)
        lower, upper = flat.min(axis=0), flat.max(axis=0)
        # Постоянная компонента: единичный диапазон, отображение остаётся обратимым
        upper = np.where(upper > lower, upper, lower + 1.0)

    scaled = (values - lower) / (upper - lower)
    # Белый даёт L чуть больше 100 из-за округления строки Y матрицы;
    # такие выходы в пределах допуска не считаются
    outside = np.any((scaled < -SCALING_TOLERANCE) | (scaled > 1.0 + SCALING_TOLERANCE), axis=-1)
    clamped = int(np.count_nonzero(outside))
    if clamped:
        logger.warning("%d pixels outside the nominal %s range were clamped", clamped, space.value)
    scaled = np.clip(scaled, 0.0, 1.0)

    params = NormalizationParams(
        space=space,
        mode=mode,
        lower=tuple(float(x) for x in lower),
        upper=tuple(float(x) for x in upper),
        clamped=clamped,
    )
    return scaled, params


def denormalize_components(normalized: np.ndarray, params: NormalizationParams) -> np.ndarray:
    lower = np.asarray(params.lower)
    return np.asarray(normalized, dtype=np.float64) * params.span + lower


class Space(str, Enum):
    """Пространство квантования; HCL квантуется как LUV."""

    RGB = "rgb"
    XYZ = "xyz"
    LUV = "luv"
    HCL = "hcl"

    @property
    def routed(self) -> "Space":
        return Space.LUV if self is Space.HCL else self

    @property
    def color_space(self) -> ColorSpace:
        return {
            Space.RGB: ColorSpace.GAMMA_RGB,
            Space.XYZ: ColorSpace.XYZ,
            Space.LUV: ColorSpace.LUV,
        }[self.routed]
