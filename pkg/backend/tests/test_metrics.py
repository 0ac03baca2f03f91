import math

import numpy as np
import pytest

from cq.colorspace import Space
from cq.errors import (
    DimensionMismatchError,
    ImageTooSmallError,
    MissingResponseEntryError,
    UndefinedLogitError,
)
from cq.image import PixelImage
from cq.metrics import (
    LOGIT_CLAMP,
    VIF_MIN_SIZE,
    VIF_SIGMAS,
    VIF_TAPS,
    clamp_vif,
    evaluate_quality,
    logit_vif,
    luminance_plane,
    mse,
    partial_response_matrix,
    psnr,
    psnr_from_mse,
    response_matrix,
    vif,
    vif_plane,
)
from cq.pipeline import quantize_image
from cq.quantizer import KMeansConfig
from tests.conftest import make_constant, make_textured


def noisy(img: PixelImage, sigma: float, seed: int = 0) -> PixelImage:
    noise = np.random.default_rng(seed).normal(size=img.samples.shape)
    samples = np.clip(img.samples.astype(np.float64) + sigma * noise, 0, 255).round().astype(np.uint8)
    return PixelImage.from_array(samples)


def checkerboard(size: int = 8) -> PixelImage:
    cells = (np.indices((size, size)).sum(axis=0) % 2).astype(np.uint8) * 255
    return PixelImage.from_array(np.repeat(cells[..., None], 3, axis=2))


# ============ VIF ============

class TestVif:
    def test_kernel_table(self):
        assert VIF_TAPS == 11
        assert VIF_SIGMAS == (0.5, 1.0, 2.0, 4.0)
        assert VIF_MIN_SIZE == 41

    def test_identical_images(self, textured_image):
        assert vif(textured_image, textured_image) == pytest.approx(1.0, abs=1e-6)

    def test_identical_larger_image(self):
        img = make_textured(128, 96)
        assert vif(img, img) == pytest.approx(1.0, abs=1e-6)
        assert vif(img, img, mode="channels") == pytest.approx(1.0, abs=1e-6)

    def test_constant_distortion_destroys_information(self, textured_image):
        gray = make_constant(textured_image.width, textured_image.height, color=(128, 128, 128))
        assert vif(textured_image, gray) < 0.05

    def test_decreases_with_noise(self, textured_image):
        values = [vif(textured_image, noisy(textured_image, sigma)) for sigma in (2, 5, 10, 20)]
        assert all(0.0 <= v <= 1.0 for v in values)
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_increases_with_k(self):
        img = make_textured(128, 128)
        values = [
            vif(img, quantize_image(img, Space.RGB, KMeansConfig(k=k, restarts=1, seed=2)).image)
            for k in (8, 16, 32, 64)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_dimension_mismatch(self, textured_image):
        other = make_textured(textured_image.width + 1, textured_image.height)
        with pytest.raises(DimensionMismatchError):
            vif(textured_image, other)

    def test_too_small(self):
        img = make_textured(60, VIF_MIN_SIZE - 1)
        with pytest.raises(ImageTooSmallError, match="minimum 41x41"):
            vif(img, img)

    def test_minimum_size_is_accepted(self):
        img = make_textured(VIF_MIN_SIZE, VIF_MIN_SIZE)
        assert vif(img, img) == pytest.approx(1.0, abs=1e-6)

    def test_unknown_mode(self, textured_image):
        with pytest.raises(ValueError):
            vif(textured_image, textured_image, mode="wavelet")

    def test_plane_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            vif_plane(np.zeros((50, 50)), np.zeros((50, 51)))

    def test_luminance_plane_of_white(self):
        plane = luminance_plane(make_constant(2, 2, color=(255, 255, 255)))
        assert plane == pytest.approx(np.full((2, 2), 255.0), abs=1e-3)


# ============ MSE / PSNR ============

class TestMsePsnr:
    def test_identical(self, textured_image):
        assert mse(textured_image, textured_image) == 0.0
        assert psnr(textured_image, textured_image) == math.inf

    def test_unit_error(self):
        a = make_constant(4, 4, color=(10, 20, 30))
        b = make_constant(4, 4, color=(11, 21, 31))
        assert mse(a, b) == 1.0

    def test_inverted_checkerboard(self):
        board = checkerboard()
        inverted = PixelImage.from_array(255 - board.samples)
        assert mse(board, inverted) == 65025.0
        assert psnr(board, inverted) == pytest.approx(0.0, abs=1e-12)

    def test_thirty_db(self):
        assert psnr_from_mse(65.025) == pytest.approx(30.0, abs=1e-9)

    def test_psnr_matches_mse(self, textured_image):
        distorted = noisy(textured_image, 5)
        error = mse(textured_image, distorted)
        assert error > 0
        assert psnr(textured_image, distorted) == pytest.approx(10 * math.log10(255**2 / error), rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            mse(make_constant(4, 4), make_constant(4, 5))


# ============ LOGIT / RESPONSES ============

class TestLogit:
    def test_values(self):
        assert logit_vif(0.5) == 0.0
        assert logit_vif(0.7310585786300049) == pytest.approx(1.0, abs=1e-6)

    def test_monotone(self):
        pairs = np.sort(np.random.default_rng(1).uniform(0.001, 0.999, size=(100, 2)), axis=1)
        for lo, hi in pairs:
            if lo < hi:
                assert logit_vif(lo) < logit_vif(hi)

    @pytest.mark.parametrize("value", [0.0, 1.0, -0.1, 1.5])
    def test_undefined(self, value):
        with pytest.raises(UndefinedLogitError):
            logit_vif(value)

    def test_clamp(self):
        assert clamp_vif(0.4) == (0.4, False)
        assert clamp_vif(1.0) == (1.0 - LOGIT_CLAMP, True)
        assert clamp_vif(0.0) == (LOGIT_CLAMP, True)
        assert math.isfinite(logit_vif(clamp_vif(1.0)[0]))


class TestResponseMatrix:
    @staticmethod
    def vifs(rgb=0.5, xyz=0.589, luv=0.45, ks=(8, 16)):
        table = {}
        for k in ks:
            table[(Space.RGB, k)] = rgb
            table[(Space.XYZ, k)] = xyz
            table[(Space.LUV, k)] = luv
        return table

    def test_equal_vifs_give_zero(self):
        matrix = response_matrix(self.vifs(rgb=0.6, xyz=0.6, luv=0.6))
        assert matrix.complete
        assert all(v == 0.0 for v in matrix.values.values())

    def test_reference_difference(self):
        matrix = response_matrix(self.vifs())
        assert matrix.ks == (8, 16)
        assert matrix.entry(Space.XYZ, 8) == pytest.approx(0.3600, abs=1e-3)

    def test_sign_follows_vif(self):
        matrix = response_matrix(self.vifs())
        assert matrix.entry(Space.XYZ, 16) > 0
        assert matrix.entry(Space.LUV, 16) < 0

    def test_best_space_survives_logit(self):
        table = self.vifs(rgb=0.52, xyz=0.61, luv=0.48, ks=(8,))
        by_vif = max((Space.RGB, Space.XYZ, Space.LUV), key=lambda s: table[(s, 8)])
        by_logit = max((Space.RGB, Space.XYZ, Space.LUV), key=lambda s: logit_vif(table[(s, 8)]))
        assert by_vif is by_logit is Space.XYZ

    def test_string_keys(self):
        matrix = response_matrix({("rgb", 8): 0.5, ("xyz", 8): 0.5, ("luv", 8): 0.5})
        assert matrix.entry("xyz", 8) == 0.0

    def test_missing_entry(self):
        table = self.vifs()
        del table[(Space.LUV, 16)]
        with pytest.raises(MissingResponseEntryError) as excinfo:
            response_matrix(table)
        assert "space=luv" in str(excinfo.value)
        assert "k=16" in str(excinfo.value)
        assert excinfo.value.k == 16

    def test_requested_k_without_data(self):
        with pytest.raises(KeyError):
            response_matrix(self.vifs(ks=(8,)), ks=(8, 32))

    def test_boundary_vif_is_an_error(self):
        with pytest.raises(UndefinedLogitError):
            response_matrix(self.vifs(xyz=1.0))

    def test_partial_flags_missing(self):
        table = self.vifs()
        del table[(Space.RGB, 16)]
        matrix = partial_response_matrix(table)
        assert not matrix.complete
        assert set(matrix.missing) == {(Space.XYZ, 16), (Space.LUV, 16)}
        assert matrix.entry(Space.XYZ, 16) is None
        assert matrix.entry(Space.XYZ, 8) == pytest.approx(0.3600, abs=1e-3)

    def test_partial_clamps_boundary(self):
        matrix = partial_response_matrix(self.vifs(xyz=1.0, ks=(8,)))
        assert matrix.complete
        assert math.isfinite(matrix.entry(Space.XYZ, 8))
        assert matrix.entry(Space.XYZ, 8) > 0


# ============ REPORT ============

def test_evaluate_quality(textured_image):
    distorted = noisy(textured_image, 10)
    report = evaluate_quality(textured_image, distorted, wcss=1.5, space="xyz", k=8)
    assert report.space is Space.XYZ
    assert 0.0 < report.vif < 1.0
    assert report.logit_vif == pytest.approx(logit_vif(report.vif))
    assert report.psnr == pytest.approx(psnr_from_mse(report.mse))
    assert not report.vif_clamped
    assert report.wcss == 1.5


def test_evaluate_quality_identical_images_have_finite_logit(textured_image):
    report = evaluate_quality(textured_image, textured_image, wcss=0.0, space=Space.RGB, k=4)
    assert report.psnr == math.inf
    assert math.isfinite(report.logit_vif)
