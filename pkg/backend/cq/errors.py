"""
Исключения пакета cq.

Каждое исключение несёт стабильный error_code; HTTP слой и CLI
используют его в ответах и сообщениях.
"""


class QuantizationError(Exception):
    """Базовая ошибка квантования / оценки / статистик."""

    error_code = "QUANTIZATION_ERROR"

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ColorDomainError(QuantizationError, ValueError):
    """Компонента цвета вне допустимого диапазона."""

    error_code = "COLOR_DOMAIN"


class SpaceMismatchError(QuantizationError, TypeError):
    """Тройка пришла не в том цветовом пространстве."""

    error_code = "SPACE_MISMATCH"


class TooFewColorsError(QuantizationError, ValueError):
    """k больше числа различных цветов."""

    error_code = "TOO_FEW_COLORS"

    def __init__(self, k: int, distinct: int):
        super().__init__(f"k={k} exceeds the number of distinct colors ({distinct})")
        self.k = k
        self.distinct = distinct


class NonFiniteInputError(QuantizationError, ValueError):
    error_code = "NON_FINITE_INPUT"


class LabelRangeError(QuantizationError, IndexError):
    error_code = "LABEL_RANGE"


class WcssIncreaseError(QuantizationError, ArithmeticError):
    """WCSS вырос между итерациями Hartigan-Wong."""

    error_code = "WCSS_INCREASE"


class DimensionMismatchError(QuantizationError, ValueError):
    error_code = "DIMENSION_MISMATCH"


class ImageTooSmallError(QuantizationError, ValueError):
    """Изображение меньше самого грубого окна VIF."""

    error_code = "IMAGE_TOO_SMALL"

    def __init__(self, width: int, height: int, minimum: int):
        super().__init__(
            f"image {width}x{height} is smaller than the minimum {minimum}x{minimum} required by VIF"
        )
        self.minimum = minimum


class UndefinedLogitError(QuantizationError, ValueError):
    error_code = "UNDEFINED_LOGIT"


class MissingResponseEntryError(QuantizationError, KeyError):
    """Нет VIF для пары (space, k)."""

    error_code = "MISSING_RESPONSE_ENTRY"

    def __init__(self, space: str, k: int):
        super().__init__(f"missing VIF for (space={space}, k={k})")
        self.space = space
        self.k = k

    def __str__(self) -> str:
        return self.detail


class EmptySampleError(QuantizationError, ValueError):
    error_code = "EMPTY_SAMPLE"


class ImageDecodeError(QuantizationError, ValueError):
    error_code = "IMAGE_DECODE"


class ImageEncodeError(QuantizationError, OSError):
    error_code = "IMAGE_ENCODE"
