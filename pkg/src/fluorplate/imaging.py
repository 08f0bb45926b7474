"""Well-photo loading, circular ROI segmentation and RGB pixel statistics.

Segmentation is percentile-threshold -> foreground centroid ->
equivalent-area circle, assuming one axially aligned well per photo.
Statistics are taken over a concentric disk shrunk by a wall-exclusion
factor so bright well-wall pixels (off-axis viewing artifacts) never
enter the profile.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

MIN_IMAGE_SIDE = 32
MIN_ROI_PIXELS = 16
TRIM_FRACTION = 0.10
# Foreground covering almost the whole frame is a segmentation failure,
# not a well.
MAX_FOREGROUND_FRACTION = 0.95

DEFAULT_THRESHOLD_PERCENTILE = 0.90
DEFAULT_WALL_EXCLUSION = 0.80


class ImagingError(Exception):
    pass


class DecodeError(ImagingError):
    pass


class UnsupportedFormat(ImagingError):
    pass


class TooSmall(ImagingError):
    pass


class NoWellFound(ImagingError):
    pass


class RoiOutOfBounds(ImagingError):
    pass


class TooFewPixels(ImagingError):
    pass


@dataclass(frozen=True)
class RasterImage:
    """8-bit RGB image; pixels is an (height, width, 3) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3 or self.pixels.dtype != np.uint8:
            raise ValueError("pixels must be an (h, w, 3) uint8 array")
        self.pixels.setflags(write=False)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class WellRoi:
    """Circular well region; statistics sample radius * wall_exclusion."""

    center_x: float
    center_y: float
    radius: float
    wall_exclusion: float

    def __post_init__(self):
        if not 0 < self.wall_exclusion <= 1:
            raise ValueError(f"wall_exclusion must be in (0, 1], got {self.wall_exclusion}")
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def effective_radius(self) -> float:
        return self.radius * self.wall_exclusion


@dataclass(frozen=True)
class SegmentationParams:
    threshold_percentile: float = DEFAULT_THRESHOLD_PERCENTILE
    wall_exclusion: float = DEFAULT_WALL_EXCLUSION


@dataclass(frozen=True)
class RgbProfile:
    """Per-channel statistics over the sampled disk.

    mean is a two-sided 10% trimmed mean (resists specular highlights);
    median and stddev are over the untrimmed sample; saturation_fraction
    counts untrimmed pixels with any channel at 255.
    """

    mean: tuple[float, float, float]
    median: tuple[float, float, float]
    stddev: tuple[float, float, float]
    pixel_count: int
    saturation_fraction: float

    @property
    def green_mean(self) -> float:
        return self.mean[1]


_ACCEPTED_MODES = {"RGB", "RGBA", "L", "LA", "P", "1"}


def load_image(data: bytes) -> RasterImage:
    """Decode PNG or baseline JPEG bytes into an 8-bit RGB raster.

    Alpha is dropped, grayscale is replicated across channels. Raises
    DecodeError on malformed files, UnsupportedFormat for non-PNG/JPEG
    containers or >8-bit / CMYK pixel formats, TooSmall below 32px.
    """
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except UnidentifiedImageError as exc:
        raise DecodeError(f"unrecognized image data: {exc}") from exc
    except OSError as exc:
        raise DecodeError(f"malformed image data: {exc}") from exc
    if img.format not in ("PNG", "JPEG"):
        raise UnsupportedFormat(f"expected PNG or JPEG, got {img.format}")
    if img.mode not in _ACCEPTED_MODES:
        raise UnsupportedFormat(f"unsupported pixel mode {img.mode!r} (need 8-bit gray/RGB)")
    if img.width < MIN_IMAGE_SIDE or img.height < MIN_IMAGE_SIDE:
        raise TooSmall(f"image is {img.width}x{img.height}; need at least {MIN_IMAGE_SIDE}px per side")
    rgb = img.convert("RGB")
    pixels = np.asarray(rgb, dtype=np.uint8).copy()
    return RasterImage(pixels=pixels)


def locate_well_roi(
    image: RasterImage,
    threshold_percentile: float = DEFAULT_THRESHOLD_PERCENTILE,
    wall_exclusion: float = DEFAULT_WALL_EXCLUSION,
) -> WellRoi:
    """Find the well as the centroid + equivalent-area circle of the
    bright-green foreground.

    The threshold is the given quantile of the green channel over the
    whole frame; foreground is strictly above it. Raises NoWellFound when
    the foreground is empty or covers nearly the whole frame.
    """
    if not 0 < threshold_percentile < 1:
        raise ValueError(f"threshold_percentile must be in (0, 1), got {threshold_percentile}")
    if not 0 < wall_exclusion <= 1:
        raise ValueError(f"wall_exclusion must be in (0, 1], got {wall_exclusion}")
    green = image.pixels[:, :, 1]
    threshold = float(np.quantile(green, threshold_percentile))
    mask = green > threshold
    count = int(mask.sum())
    if count == 0:
        raise NoWellFound("no pixels above the green threshold")
    if count > MAX_FOREGROUND_FRACTION * green.size:
        raise NoWellFound(f"foreground covers {count / green.size:.0%} of the frame")
    ys, xs = np.nonzero(mask)
    center_x = float(xs.mean())
    center_y = float(ys.mean())
    radius = math.sqrt(count / math.pi)
    return WellRoi(center_x=center_x, center_y=center_y, radius=radius, wall_exclusion=wall_exclusion)


def _disk_mask(image: RasterImage, cx: float, cy: float, radius: float) -> np.ndarray:
    ys = np.arange(image.height, dtype=np.float64)[:, None]
    xs = np.arange(image.width, dtype=np.float64)[None, :]
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= radius * radius


def extract_profile(image: RasterImage, roi: WellRoi) -> RgbProfile:
    """Channel statistics over the wall-excluded disk of the ROI.

    Raises RoiOutOfBounds if the effective disk leaves the frame and
    TooFewPixels below 16 sampled pixels.
    """
    r_eff = roi.effective_radius
    if (
        roi.center_x - r_eff < 0
        or roi.center_y - r_eff < 0
        or roi.center_x + r_eff > image.width - 1
        or roi.center_y + r_eff > image.height - 1
    ):
        raise RoiOutOfBounds(
            f"effective disk (center ({roi.center_x:.1f}, {roi.center_y:.1f}), radius {r_eff:.1f}) "
            f"leaves the {image.width}x{image.height} frame"
        )
    mask = _disk_mask(image, roi.center_x, roi.center_y, r_eff)
    values = image.pixels[mask].astype(np.int64)
    n = values.shape[0]
    if n < MIN_ROI_PIXELS:
        raise TooFewPixels(f"effective disk holds {n} pixels; need at least {MIN_ROI_PIXELS}")

    trim = int(n * TRIM_FRACTION)
    # statistics run over per-channel sorted values, so the profile is
    # independent of pixel traversal order
    sorted_values = np.sort(values, axis=0)
    trimmed = sorted_values[trim : n - trim] if trim else sorted_values
    mean = tuple(float(v) for v in trimmed.mean(axis=0))
    median = tuple(float(v) for v in np.median(sorted_values, axis=0))
    stddev = tuple(float(v) for v in sorted_values.std(axis=0))
    saturated = int((values == 255).any(axis=1).sum())
    return RgbProfile(
        mean=mean,
        median=median,
        stddev=stddev,
        pixel_count=n,
        saturation_fraction=saturated / n,
    )


def analyze_well_image(data: bytes, params: SegmentationParams = SegmentationParams()) -> RgbProfile:
    """Full per-photo pipeline: decode, segment the well, profile it."""
    image = load_image(data)
    roi = locate_well_roi(image, params.threshold_percentile, params.wall_exclusion)
    return extract_profile(image, roi)


PROFILE_CSV_HEADER = "well_index,mean_r,mean_g,mean_b,median_g,stddev_g,pixel_count,saturation_fraction"


def profile_csv_row(well_index: int, profile: RgbProfile) -> str:
    return (
        f"{well_index},{profile.mean[0]:.2f},{profile.mean[1]:.2f},{profile.mean[2]:.2f},"
        f"{profile.median[1]:.2f},{profile.stddev[1]:.2f},{profile.pixel_count},"
        f"{profile.saturation_fraction:.4f}"
    )
