import logging

import numpy as np
import pytest
from PIL import Image

from cq.errors import DimensionMismatchError, ImageDecodeError, ImageEncodeError
from cq.image import PixelImage, decode, encode


class TestPixelImage:
    def test_shape_checked(self):
        with pytest.raises(DimensionMismatchError):
            PixelImage(width=4, height=3, samples=np.zeros((4, 3, 3), dtype=np.uint8))

    def test_empty_rejected(self):
        with pytest.raises(DimensionMismatchError):
            PixelImage(width=0, height=3, samples=np.zeros((3, 0, 3), dtype=np.uint8))

    def test_edges(self):
        img = PixelImage.from_array(np.zeros((5, 9, 3), dtype=np.uint8))
        assert (img.width, img.height) == (9, 5)
        assert (img.short_edge, img.long_edge, img.pixel_count) == (5, 9, 45)

    def test_unit_float_order(self):
        samples = np.arange(2 * 3 * 3, dtype=np.uint8).reshape(2, 3, 3)
        flat = PixelImage.from_array(samples).as_unit_float()
        assert flat.shape == (6, 3)
        assert flat[1] == pytest.approx(np.array([3, 4, 5]) / 255.0)

    def test_distinct_colors(self, four_color_image):
        assert four_color_image.distinct_colors() == 4


class TestDecode:
    @pytest.mark.parametrize("name", ["a.png", "a.tif", "a.tiff"])
    def test_lossless(self, write_image, textured_image, name):
        path = write_image(textured_image, name)
        assert np.array_equal(decode(path).samples, textured_image.samples)

    def test_grayscale_expanded(self, tmp_path):
        path = tmp_path / "gray.png"
        Image.fromarray(np.array([[0, 100], [200, 255]], dtype=np.uint8)).save(path)
        img = decode(path)
        assert img.samples[1, 0].tolist() == [200, 200, 200]

    def test_palette_expanded(self, tmp_path):
        path = tmp_path / "pal.png"
        im = Image.new("P", (2, 2))
        im.putpalette([255, 0, 0, 0, 128, 255, 20, 200, 40, 250, 250, 250])
        im.putdata([0, 1, 2, 3])
        im.save(path)
        img = decode(path)
        assert img.samples[0, 1].tolist() == [0, 128, 255]
        assert img.samples[1, 1].tolist() == [250, 250, 250]

    def test_alpha_discarded_with_warning(self, tmp_path, caplog):
        path = tmp_path / "alpha.png"
        rgba = np.zeros((3, 4, 4), dtype=np.uint8)
        rgba[..., 0] = 200
        rgba[..., 3] = 17
        Image.fromarray(rgba).save(path)
        with caplog.at_level(logging.WARNING, logger="cq.image"):
            img = decode(path)
        assert img.samples[0, 0].tolist() == [200, 0, 0]
        assert "alpha channel discarded" in caplog.text

    def test_sixteen_bit_png(self, tmp_path):
        path = tmp_path / "deep.png"
        Image.new("I;16", (8, 8)).save(path)
        with pytest.raises(ImageDecodeError, match="unsupported bit depth 16"):
            decode(path)

    def test_sixteen_bit_tiff(self, tmp_path):
        path = tmp_path / "deep.tif"
        Image.new("I;16", (8, 8)).save(path)
        with pytest.raises(ImageDecodeError, match="unsupported bit depth 16"):
            decode(path)

    def test_cmyk_rejected(self, tmp_path):
        path = tmp_path / "print.tif"
        Image.new("CMYK", (8, 8)).save(path)
        with pytest.raises(ImageDecodeError, match="unsupported colorspace CMYK"):
            decode(path)

    def test_jpeg_rejected(self, tmp_path):
        path = tmp_path / "photo.jpg"
        Image.new("RGB", (8, 8)).save(path)
        with pytest.raises(ImageDecodeError, match="unsupported format JPEG"):
            decode(path)

    def test_truncated_file(self, write_image, textured_image, tmp_path):
        data = write_image(textured_image).read_bytes()
        path = tmp_path / "cut.png"
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(ImageDecodeError):
            decode(path)

    def test_not_an_image(self, tmp_path):
        path = tmp_path / "notes.png"
        path.write_text("definitely not a png")
        with pytest.raises(ImageDecodeError):
            decode(path)

    def test_missing(self, tmp_path):
        with pytest.raises(ImageDecodeError, match="file not found"):
            decode(tmp_path / "nope.png")


class TestEncode:
    def test_creates_directories(self, tmp_path, four_color_image):
        path = encode(four_color_image, tmp_path / "deep" / "er" / "out.png")
        assert path.is_file()

    def test_unknown_extension(self, tmp_path, four_color_image):
        with pytest.raises(ImageEncodeError, match="unsupported extension"):
            encode(four_color_image, tmp_path / "out.bmp")

    def test_errors_are_os_errors(self, tmp_path, four_color_image):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError):
            encode(four_color_image, blocker / "out.png")
