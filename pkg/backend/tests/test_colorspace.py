import itertools

import numpy as np
import pytest

from cq.colorspace import (
    D65,
    LUV_KNOT,
    XYZ_ROW_SUMS,
    ColorSpace,
    ColorTriple,
    ScalingMode,
    Space,
    convert_pixels,
    denormalize_components,
    hcl_to_luv,
    luv_to_hcl,
    luv_to_xyz,
    normalize_components,
    rgb_to_xyz,
    srgb_delinearize,
    srgb_linearize,
    xyz_to_luv,
    xyz_to_rgb,
    xyz_to_xyy,
)
from cq.errors import ColorDomainError, SpaceMismatchError


def triple(c0, c1, c2, space):
    return ColorTriple(c0, c1, c2, space)


def random_linear_rgb(n=200, seed=7):
    return np.random.default_rng(seed).random((n, 3))


class TestTransferFunction:
    def test_endpoints(self):
        assert srgb_linearize(0.0) == 0.0
        assert srgb_linearize(1.0) == pytest.approx(1.0, abs=1e-15)
        assert srgb_delinearize(0.0) == 0.0
        assert srgb_delinearize(1.0) == pytest.approx(1.0, abs=1e-15)

    def test_breakpoint_uses_linear_branch(self):
        assert srgb_linearize(0.04045) == pytest.approx(0.0031308, abs=1e-7)
        assert srgb_linearize(0.04045) == 0.04045 / 12.92

    def test_branches_nearly_continuous(self):
        power_branch = ((0.04045 + 0.055) / 1.055) ** 2.4
        assert abs(power_branch - 0.04045 / 12.92) < 1e-6

    def test_round_trip(self):
        assert srgb_delinearize(srgb_linearize(0.5)) == pytest.approx(0.5, abs=1e-12)
        for x in np.linspace(0, 1, 257):
            assert srgb_delinearize(srgb_linearize(x)) == pytest.approx(x, abs=1e-12)

    def test_monotone(self):
        xs = np.linspace(0, 1, 1001)
        ys = [srgb_linearize(x) for x in xs]
        assert all(b >= a for a, b in zip(ys, ys[1:]))

    @pytest.mark.parametrize("value", [-0.01, 1.01, float("nan")])
    def test_out_of_range_is_domain_error(self, value):
        with pytest.raises(ColorDomainError):
            srgb_linearize(value)
        with pytest.raises(ValueError):
            srgb_delinearize(value)


class TestRgbXyz:
    def test_zero(self):
        t = rgb_to_xyz(triple(0, 0, 0, ColorSpace.LINEAR_RGB))
        assert (t.c0, t.c1, t.c2) == (0.0, 0.0, 0.0)
        assert t.space is ColorSpace.XYZ

    def test_red_column(self):
        t = rgb_to_xyz(triple(1, 0, 0, ColorSpace.LINEAR_RGB))
        assert t.as_array() == pytest.approx([0.4124564, 0.2126729, 0.0193339], abs=1e-15)

    def test_white_row_sums(self):
        t = rgb_to_xyz(triple(1, 1, 1, ColorSpace.LINEAR_RGB))
        assert t.as_array() == pytest.approx([0.95047, 1.0000001, 1.08883], abs=1e-6)

    def test_wrong_space_is_type_error(self):
        with pytest.raises(SpaceMismatchError):
            rgb_to_xyz(triple(0.1, 0.2, 0.3, ColorSpace.XYZ))
        with pytest.raises(TypeError):
            xyz_to_rgb(triple(0.1, 0.2, 0.3, ColorSpace.LINEAR_RGB))

    def test_inverse_of_red_column(self):
        t = xyz_to_rgb(triple(0.4124564, 0.2126729, 0.0193339, ColorSpace.XYZ))
        assert t.as_array() == pytest.approx([1, 0, 0], abs=1e-9)
        assert not t.out_of_gamut

    def test_round_trip(self):
        for p in random_linear_rgb():
            back = xyz_to_rgb(rgb_to_xyz(triple(*p, ColorSpace.LINEAR_RGB)))
            assert back.as_array() == pytest.approx(p, abs=1e-10)

    def test_out_of_gamut_is_clamped_and_flagged(self):
        t = xyz_to_rgb(triple(0.0, 1.0, 0.0, ColorSpace.XYZ))
        assert t.out_of_gamut
        assert np.all((t.as_array() >= 0) & (t.as_array() <= 1))


class TestChromaticity:
    def test_equal_components(self):
        c = xyz_to_xyy(triple(1, 1, 1, ColorSpace.XYZ))
        assert c.x == pytest.approx(1 / 3)
        assert c.y == pytest.approx(1 / 3)

    def test_d65_row_sums(self):
        c = xyz_to_xyy(triple(0.95047, 1.0, 1.08883, ColorSpace.XYZ))
        assert c.x == pytest.approx(0.31273, abs=1e-4)
        assert c.y == pytest.approx(0.32902, abs=1e-4)
        assert c.Y == 1.0

    def test_components_sum_to_one(self):
        for X, Y, Z in np.random.default_rng(3).random((50, 3)):
            c = xyz_to_xyy(triple(X, Y, Z, ColorSpace.XYZ))
            assert 1 - c.x - c.y == pytest.approx(Z / (X + Y + Z), abs=1e-12)

    def test_black_gets_white_chromaticity(self):
        ref = D65.reference_array()
        c = xyz_to_xyy(triple(0, 0, 0, ColorSpace.XYZ))
        assert c.x == pytest.approx(ref[0] / ref.sum())
        assert c.y == pytest.approx(ref[1] / ref.sum())


class TestLuv:
    def test_white_point(self):
        luv = xyz_to_luv(D65.reference_xyz())
        assert luv.as_array() == pytest.approx([100, 0, 0], abs=1e-9)

    def test_black(self):
        luv = xyz_to_luv(triple(0, 0, 0, ColorSpace.XYZ))
        assert (luv.c0, luv.c1, luv.c2) == (0.0, 0.0, 0.0)

    def test_branches_agree_at_knot(self):
        scaled = D65.reference_array() * LUV_KNOT
        luv = xyz_to_luv(triple(*scaled, ColorSpace.XYZ))
        assert luv.c0 == pytest.approx(8.0, abs=1e-9)
        assert 116.0 * np.cbrt(LUV_KNOT) - 16.0 == pytest.approx(8.0, abs=1e-9)

    def test_inverse_white(self):
        xyz = luv_to_xyz(triple(100, 0, 0, ColorSpace.LUV))
        assert xyz.as_array() == pytest.approx(D65.reference_array(), abs=1e-6)

    def test_inverse_black(self):
        xyz = luv_to_xyz(triple(0, 0, 0, ColorSpace.LUV))
        assert (xyz.c0, xyz.c1, xyz.c2) == (0.0, 0.0, 0.0)

    def test_round_trip(self):
        for p in random_linear_rgb(seed=11):
            xyz = rgb_to_xyz(triple(*p, ColorSpace.LINEAR_RGB))
            back = luv_to_xyz(xyz_to_luv(xyz))
            assert back.as_array() == pytest.approx(xyz.as_array(), abs=1e-8)

    def test_wrong_space(self):
        with pytest.raises(SpaceMismatchError):
            xyz_to_luv(triple(50, 0, 0, ColorSpace.LUV))


class TestHcl:
    def test_polar_example(self):
        hcl = luv_to_hcl(triple(50, 3, 4, ColorSpace.LUV))
        assert hcl.c0 == 50
        assert hcl.c1 == pytest.approx(5.0)
        assert hcl.c2 == pytest.approx(53.1301, abs=1e-4)

    def test_pole(self):
        hcl = luv_to_hcl(triple(50, 0, 0, ColorSpace.LUV))
        assert (hcl.c1, hcl.c2) == (0.0, 0.0)

    def test_negative_u_axis(self):
        hcl = luv_to_hcl(triple(50, -1, 0, ColorSpace.LUV))
        assert hcl.c1 == pytest.approx(1.0)
        assert hcl.c2 == pytest.approx(180.0)

    def test_hue_in_range(self):
        for u, v in np.random.default_rng(5).normal(size=(200, 2)) * 50:
            h = luv_to_hcl(triple(50, u, v, ColorSpace.LUV)).c2
            assert 0.0 <= h < 360.0

    def test_tiny_negative_angle_wraps_below_360(self):
        h = luv_to_hcl(triple(50, 1.0, -1e-300, ColorSpace.LUV)).c2
        assert 0.0 <= h < 360.0

    def test_zero_chroma_to_luv(self):
        luv = hcl_to_luv(triple(40, 0, 123.0, ColorSpace.HCL))
        assert luv.as_array() == pytest.approx([40, 0, 0], abs=1e-15)

    def test_inverse_example(self):
        luv = hcl_to_luv(triple(50, 5, 53.1301, ColorSpace.HCL))
        assert luv.as_array() == pytest.approx([50, 3, 4], abs=1e-4)

    def test_round_trips(self):
        rng = np.random.default_rng(9)
        for u, v in rng.normal(size=(100, 2)) * 40:
            t = triple(60, u, v, ColorSpace.LUV)
            assert hcl_to_luv(luv_to_hcl(t)).as_array() == pytest.approx(t.as_array(), abs=1e-10)
        for c, h in zip(rng.random(100) * 100, rng.random(100) * 360):
            t = triple(60, c, h, ColorSpace.HCL)
            assert luv_to_hcl(hcl_to_luv(t)).as_array() == pytest.approx(t.as_array(), abs=1e-9)

    def test_negative_chroma_rejected(self):
        with pytest.raises(ColorDomainError):
            hcl_to_luv(triple(50, -1, 0, ColorSpace.HCL))


class TestNormalization:
    def test_rgb_is_identity(self):
        pixels = np.random.default_rng(1).random((30, 3))
        scaled, params = normalize_components(pixels, ColorSpace.GAMMA_RGB)
        assert np.array_equal(scaled, pixels)
        assert params.lower == (0.0, 0.0, 0.0)
        assert params.upper == (1.0, 1.0, 1.0)

    def test_luv_corner(self):
        scaled, _ = normalize_components(np.array([[100.0, -100.0, 100.0]]), ColorSpace.LUV)
        assert scaled[0] == pytest.approx([1, 0, 1])

    def test_xyz_uses_row_sums(self):
        scaled, params = normalize_components(XYZ_ROW_SUMS.reshape(1, 3), ColorSpace.XYZ)
        assert scaled[0] == pytest.approx([1, 1, 1], abs=1e-6)
        assert params.clamped == 0

    def test_round_trip(self):
        luv = np.column_stack([
            np.linspace(0, 100, 50), np.linspace(-90, 90, 50), np.linspace(80, -80, 50),
        ])
        scaled, params = normalize_components(luv, ColorSpace.LUV)
        assert denormalize_components(scaled, params) == pytest.approx(luv, abs=1e-10)

    def test_out_of_range_is_clamped_and_counted(self):
        scaled, params = normalize_components(np.array([[50.0, 175.0, 0.0], [50.0, 0.0, 0.0]]), ColorSpace.LUV)
        assert params.clamped == 1
        assert scaled.max() <= 1.0

    def test_white_is_not_counted_as_clamped(self):
        white = np.ones((4, 3))
        luv, _ = convert_pixels(white, ColorSpace.GAMMA_RGB, ColorSpace.LUV)
        assert luv[0, 0] >= 100.0
        scaled, params = normalize_components(luv, ColorSpace.LUV)
        assert params.clamped == 0
        assert scaled[:, 0] == pytest.approx(np.ones(4))
        assert scaled.max() <= 1.0

    def test_minmax(self):
        values = np.array([[10.0, 5.0, 3.0], [20.0, 5.0, 7.0]])
        scaled, params = normalize_components(values, ColorSpace.LUV, ScalingMode.MINMAX)
        assert scaled[:, 0] == pytest.approx([0, 1])
        assert scaled[:, 2] == pytest.approx([0, 1])
        # постоянная компонента остаётся обратимой
        assert denormalize_components(scaled, params) == pytest.approx(values)

    def test_hcl_has_no_nominal_range(self):
        with pytest.raises(SpaceMismatchError):
            normalize_components(np.zeros((1, 3)), ColorSpace.HCL)


class TestFullChain:
    def test_eight_bit_round_trip(self):
        rng = np.random.default_rng(2024)
        corners = np.array(list(itertools.product([0, 255], repeat=3)))
        samples = np.vstack([corners, rng.integers(0, 256, size=(100_000, 3))])
        gamma = samples / 255.0

        hcl, _ = convert_pixels(gamma, ColorSpace.GAMMA_RGB, ColorSpace.HCL)
        back, out_of_gamut = convert_pixels(hcl, ColorSpace.HCL, ColorSpace.GAMMA_RGB)

        assert np.max(np.abs(back * 255.0 - samples)) <= 0.5
        assert not out_of_gamut.any()

    def test_same_space_is_identity(self):
        pixels = np.random.default_rng(0).random((10, 3))
        out, mask = convert_pixels(pixels, ColorSpace.XYZ, ColorSpace.XYZ)
        assert np.array_equal(out, pixels)
        assert not mask.any()

    def test_hcl_routes_to_luv(self):
        assert Space.HCL.routed is Space.LUV
        assert Space.HCL.color_space is ColorSpace.LUV
        assert Space.RGB.color_space is ColorSpace.GAMMA_RGB
