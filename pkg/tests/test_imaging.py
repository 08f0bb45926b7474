import dataclasses
import io
import math

import numpy as np
import pytest
from PIL import Image

from conftest import png_bytes
from fluorplate.imaging import (
    DecodeError,
    NoWellFound,
    RasterImage,
    RoiOutOfBounds,
    SegmentationParams,
    TooFewPixels,
    TooSmall,
    UnsupportedFormat,
    WellRoi,
    analyze_well_image,
    extract_profile,
    load_image,
    locate_well_roi,
)
from fluorplate.photometry import RenderSpec, render_well_image


def uniform_image(width: int, height: int, rgb) -> RasterImage:
    pixels = np.zeros((height, width, 3), dtype=np.uint8)
    pixels[:, :] = rgb
    return RasterImage(pixels=pixels)


def disk_spec(**overrides) -> RenderSpec:
    base = dict(
        width=256,
        height=256,
        disk_center=(100.0, 100.0),
        disk_radius=50.0,
        interior_rgb=(0, 180, 0),
    )
    base.update(overrides)
    return RenderSpec(**base)


class TestLoadImage:
    def test_uniform_black_png(self):
        image = load_image(png_bytes(uniform_image(64, 64, (0, 0, 0))))
        assert image.width == image.height == 64
        assert image.pixels.shape == (64, 64, 3)
        assert not image.pixels.any()

    def test_truncated_png(self):
        data = png_bytes(uniform_image(64, 64, (0, 0, 0)))
        with pytest.raises(DecodeError):
            load_image(data[: len(data) // 2])

    def test_garbage_bytes(self):
        with pytest.raises(DecodeError):
            load_image(b"not an image at all")

    def test_render_roundtrip_is_lossless(self):
        rendered = render_well_image(disk_spec(noise_stddev=9.0, seed=11))
        decoded = load_image(png_bytes(rendered))
        assert (decoded.pixels == rendered.pixels).all()

    def test_jpeg_accepted(self):
        buf = io.BytesIO()
        Image.fromarray(uniform_image(64, 64, (10, 20, 30)).pixels, "RGB").save(buf, "JPEG")
        image = load_image(buf.getvalue())
        assert image.width == 64

    def test_grayscale_promoted_to_rgb(self):
        buf = io.BytesIO()
        Image.new("L", (64, 64), 77).save(buf, "PNG")
        image = load_image(buf.getvalue())
        assert (image.pixels == 77).all()

    def test_alpha_dropped(self):
        buf = io.BytesIO()
        Image.new("RGBA", (64, 64), (5, 6, 7, 128)).save(buf, "PNG")
        image = load_image(buf.getvalue())
        assert tuple(image.pixels[0, 0]) == (5, 6, 7)

    def test_sixteen_bit_png_rejected(self):
        buf = io.BytesIO()
        Image.new("I;16", (64, 64), 1000).save(buf, "PNG")
        with pytest.raises(UnsupportedFormat):
            load_image(buf.getvalue())

    def test_non_png_jpeg_container_rejected(self):
        buf = io.BytesIO()
        Image.new("RGB", (64, 64)).save(buf, "BMP")
        with pytest.raises(UnsupportedFormat):
            load_image(buf.getvalue())

    def test_too_small(self):
        with pytest.raises(TooSmall):
            load_image(png_bytes(uniform_image(31, 64, (0, 0, 0))))


class TestLocateWellRoi:
    def test_synthetic_disk_recovered(self):
        image = render_well_image(disk_spec())
        roi = locate_well_roi(image, threshold_percentile=0.5, wall_exclusion=0.8)
        assert abs(roi.center_x - 100.0) <= 1.0
        assert abs(roi.center_y - 100.0) <= 1.0
        assert abs(roi.radius - 50.0) <= 0.05 * 50.0
        assert roi.wall_exclusion == 0.8

    def test_matches_direct_foreground_statistics(self):
        # recompute the centroid and equivalent-area radius straight from
        # the thresholded mask
        image = render_well_image(disk_spec(noise_stddev=4.0, seed=5))
        percentile = 0.95
        roi = locate_well_roi(image, threshold_percentile=percentile)
        green = image.pixels[:, :, 1]
        mask = green > np.quantile(green, percentile)
        ys, xs = np.nonzero(mask)
        assert roi.center_x == pytest.approx(xs.mean())
        assert roi.center_y == pytest.approx(ys.mean())
        assert roi.radius == pytest.approx(math.sqrt(mask.sum() / math.pi))

    def test_all_black_image(self):
        with pytest.raises(NoWellFound):
            locate_well_roi(uniform_image(64, 64, (0, 0, 0)))

    def test_uniform_bright_image(self):
        with pytest.raises(NoWellFound):
            locate_well_roi(uniform_image(64, 64, (200, 200, 200)))

    def test_near_full_frame_foreground_rejected(self):
        pixels = np.full((64, 64, 3), 200, dtype=np.uint8)
        pixels[0, 0] = (0, 0, 0)  # a single dark pixel pulls the quantile down
        with pytest.raises(NoWellFound):
            locate_well_roi(RasterImage(pixels=pixels), threshold_percentile=0.0001)

    @pytest.mark.parametrize("percentile,exclusion", [(0.0, 0.8), (1.0, 0.8), (0.5, 0.0), (0.5, 1.5)])
    def test_parameter_validation(self, percentile, exclusion):
        image = uniform_image(64, 64, (0, 10, 0))
        with pytest.raises(ValueError):
            locate_well_roi(image, percentile, exclusion)


class TestExtractProfile:
    def test_constant_field(self):
        image = uniform_image(100, 100, (0, 128, 0))
        roi = WellRoi(center_x=50.0, center_y=50.0, radius=20.0, wall_exclusion=1.0)
        profile = extract_profile(image, roi)
        assert profile.mean == (0.0, 128.0, 0.0)
        assert profile.median == (0.0, 128.0, 0.0)
        assert profile.stddev == (0.0, 0.0, 0.0)
        assert profile.saturation_fraction == 0.0
        assert profile.pixel_count > 0

    def test_fully_saturated(self):
        image = uniform_image(100, 100, (255, 255, 255))
        roi = WellRoi(center_x=50.0, center_y=50.0, radius=20.0, wall_exclusion=1.0)
        assert extract_profile(image, roi).saturation_fraction == 1.0

    def test_mask_correctness(self):
        # poison every pixel outside the effective disk; any leak would
        # drag the red mean above zero
        roi = WellRoi(center_x=60.0, center_y=60.0, radius=30.0, wall_exclusion=0.8)
        pixels = np.zeros((120, 120, 3), dtype=np.uint8)
        ys, xs = np.mgrid[0:120, 0:120]
        inside = (xs - 60.0) ** 2 + (ys - 60.0) ** 2 <= roi.effective_radius**2
        pixels[inside] = (0, 90, 0)
        pixels[~inside] = (255, 255, 255)
        profile = extract_profile(RasterImage(pixels=pixels), roi)
        assert profile.mean == (0.0, 90.0, 0.0)
        assert profile.pixel_count == int(inside.sum())
        assert profile.saturation_fraction == 0.0

    def test_trimmed_mean_resists_specular_outliers(self):
        # 5% saturated speckle is inside the 10% two-sided trim
        rng = np.random.default_rng(0)
        pixels = np.zeros((120, 120, 3), dtype=np.uint8)
        pixels[:, :, 1] = 100
        speckle = rng.random((120, 120)) < 0.05
        pixels[speckle] = (255, 255, 255)
        roi = WellRoi(center_x=60.0, center_y=60.0, radius=40.0, wall_exclusion=1.0)
        profile = extract_profile(RasterImage(pixels=pixels), roi)
        assert profile.mean[1] == 100.0
        assert profile.median[1] == 100.0
        assert profile.saturation_fraction > 0.0

    def test_roi_out_of_bounds(self):
        image = uniform_image(64, 64, (0, 128, 0))
        roi = WellRoi(center_x=5.0, center_y=32.0, radius=20.0, wall_exclusion=0.8)
        with pytest.raises(RoiOutOfBounds):
            extract_profile(image, roi)

    def test_too_few_pixels(self):
        image = uniform_image(64, 64, (0, 128, 0))
        roi = WellRoi(center_x=32.0, center_y=32.0, radius=2.0, wall_exclusion=0.9)
        with pytest.raises(TooFewPixels):
            extract_profile(image, roi)

    def test_traversal_order_free(self):
        # rotating the frame permutes pixel order; integer-valued channels
        # make the statistics bit-identical
        image = render_well_image(disk_spec(noise_stddev=6.0, seed=9))
        roi = locate_well_roi(image, 0.9, 0.8)
        rotated = RasterImage(pixels=np.ascontiguousarray(np.rot90(image.pixels)))
        w = image.pixels.shape[1]
        rotated_roi = dataclasses.replace(roi, center_x=roi.center_y, center_y=w - 1 - roi.center_x)
        assert extract_profile(image, roi) == extract_profile(rotated, rotated_roi)

    def test_shrinking_wall_exclusion_never_raises_stddev(self):
        # bright wall ring over a uniform interior: the ring is the only
        # variance source, so a tighter mask can only calm the profile
        image = render_well_image(disk_spec(interior_rgb=(0, 120, 0), wall_ring_rgb=(0, 230, 0)))
        roi = locate_well_roi(image, 0.5, 1.0)
        exclusions = [1.0, 0.95, 0.9, 0.85, 0.8, 0.6, 0.4]
        stddevs = [
            extract_profile(image, dataclasses.replace(roi, wall_exclusion=e)).stddev[1]
            for e in exclusions
        ]
        assert all(b <= a for a, b in zip(stddevs, stddevs[1:]))
        assert stddevs[0] > 0.0
        assert stddevs[-1] == 0.0


class TestAnalyzeWellImage:
    def test_recovers_interior_green(self):
        data = png_bytes(render_well_image(disk_spec(disk_radius=40.0, interior_rgb=(0, 150, 0))))
        profile = analyze_well_image(data)
        assert abs(profile.mean[1] - 150.0) <= 1.0

    def test_all_black_frame(self):
        data = png_bytes(uniform_image(64, 64, (0, 0, 0)))
        with pytest.raises(NoWellFound):
            analyze_well_image(data)

    def test_well_clipped_at_border(self):
        # bright band hugging the left edge: the centroid sits closer to
        # the border than the exclusion radius
        pixels = np.zeros((64, 64, 3), dtype=np.uint8)
        pixels[:, :6, 1] = 200
        with pytest.raises(RoiOutOfBounds):
            analyze_well_image(png_bytes(RasterImage(pixels=pixels)))

    def test_repeat_analysis_is_bit_identical(self):
        data = png_bytes(render_well_image(disk_spec(noise_stddev=8.0, seed=21)))
        params = SegmentationParams()
        assert analyze_well_image(data, params) == analyze_well_image(data, params)
