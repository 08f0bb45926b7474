"""Wavelength -> RGB appearance model and a deterministic well renderer.

The renderer produces images with known ground-truth statistics and is the
test oracle for the segmentation pipeline: a seeded well photo with a
chosen interior color, optional bright wall ring, and optional Gaussian
pixel noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imaging import RasterImage

# CIE 1931 2-degree standard observer color matching functions,
# 5 nm spacing, 380-780 nm (public-domain tabulation).
CIE_1931_CMF = (
    (380, 0.001368, 0.000039, 0.006450),
    (385, 0.002236, 0.000064, 0.010550),
    (390, 0.004243, 0.000120, 0.020050),
    (395, 0.007650, 0.000217, 0.036210),
    (400, 0.014310, 0.000396, 0.067850),
    (405, 0.023190, 0.000640, 0.110200),
    (410, 0.043510, 0.001210, 0.207400),
    (415, 0.077630, 0.002180, 0.371300),
    (420, 0.134380, 0.004000, 0.645600),
    (425, 0.214770, 0.007300, 1.039050),
    (430, 0.283900, 0.011600, 1.385600),
    (435, 0.328500, 0.016840, 1.622960),
    (440, 0.348280, 0.023000, 1.747060),
    (445, 0.348060, 0.029800, 1.782600),
    (450, 0.336200, 0.038000, 1.772110),
    (455, 0.318700, 0.048000, 1.744100),
    (460, 0.290800, 0.060000, 1.669200),
    (465, 0.251100, 0.073900, 1.528100),
    (470, 0.195360, 0.090980, 1.287640),
    (475, 0.142100, 0.112600, 1.041900),
    (480, 0.095640, 0.139020, 0.812950),
    (485, 0.057950, 0.169300, 0.616200),
    (490, 0.032010, 0.208020, 0.465180),
    (495, 0.014700, 0.258600, 0.353300),
    (500, 0.004900, 0.323000, 0.272000),
    (505, 0.002400, 0.407300, 0.212300),
    (510, 0.009300, 0.503000, 0.158200),
    (515, 0.029100, 0.608200, 0.111700),
    (520, 0.063270, 0.710000, 0.078250),
    (525, 0.109600, 0.793200, 0.057250),
    (530, 0.165500, 0.862000, 0.042160),
    (535, 0.225750, 0.914850, 0.029840),
    (540, 0.290400, 0.954000, 0.020300),
    (545, 0.359700, 0.980300, 0.013400),
    (550, 0.433450, 0.994950, 0.008750),
    (555, 0.512050, 1.000000, 0.005750),
    (560, 0.594500, 0.995000, 0.003900),
    (565, 0.678400, 0.978600, 0.002750),
    (570, 0.762100, 0.952000, 0.002100),
    (575, 0.842500, 0.915400, 0.001800),
    (580, 0.916300, 0.870000, 0.001650),
    (585, 0.978600, 0.816300, 0.001400),
    (590, 1.026300, 0.757000, 0.001100),
    (595, 1.056700, 0.694900, 0.001000),
    (600, 1.062200, 0.631000, 0.000800),
    (605, 1.045600, 0.566800, 0.000600),
    (610, 1.002600, 0.503000, 0.000340),
    (615, 0.938400, 0.441200, 0.000240),
    (620, 0.854450, 0.381000, 0.000190),
    (625, 0.751400, 0.321000, 0.000100),
    (630, 0.642400, 0.265000, 0.000050),
    (635, 0.541900, 0.217000, 0.000030),
    (640, 0.447900, 0.175000, 0.000020),
    (645, 0.360800, 0.138200, 0.000010),
    (650, 0.283500, 0.107000, 0.000000),
    (655, 0.218700, 0.081600, 0.000000),
    (660, 0.164900, 0.061000, 0.000000),
    (665, 0.121200, 0.044580, 0.000000),
    (670, 0.087400, 0.032000, 0.000000),
    (675, 0.063600, 0.023200, 0.000000),
    (680, 0.046770, 0.017000, 0.000000),
    (685, 0.032900, 0.011920, 0.000000),
    (690, 0.022700, 0.008210, 0.000000),
    (695, 0.015840, 0.005723, 0.000000),
    (700, 0.011359, 0.004102, 0.000000),
    (705, 0.008111, 0.002929, 0.000000),
    (710, 0.005790, 0.002091, 0.000000),
    (715, 0.004109, 0.001484, 0.000000),
    (720, 0.002899, 0.001047, 0.000000),
    (725, 0.002049, 0.000740, 0.000000),
    (730, 0.001440, 0.000520, 0.000000),
    (735, 0.001000, 0.000361, 0.000000),
    (740, 0.000690, 0.000249, 0.000000),
    (745, 0.000476, 0.000172, 0.000000),
    (750, 0.000332, 0.000120, 0.000000),
    (755, 0.000235, 0.000085, 0.000000),
    (760, 0.000166, 0.000060, 0.000000),
    (765, 0.000117, 0.000042, 0.000000),
    (770, 0.000083, 0.000030, 0.000000),
    (775, 0.000059, 0.000021, 0.000000),
    (780, 0.000042, 0.000015, 0.000000),
)

# Linear-light XYZ -> RGB with the standard sRGB/Rec.709 primaries.
_XYZ_TO_RGB = np.array(
    [
        [3.2406, -1.5372, -0.4986],
        [-0.9689, 1.8758, 0.0415],
        [0.0557, -0.2040, 1.0570],
    ]
)

GAMMA = 1 / 2.2

MIN_STOKES_SHIFT_NM = 10.0
MAX_STOKES_SHIFT_NM = 150.0

WALL_RING_WIDTH_FRACTION = 0.15
MAX_NOISE_STDDEV = 30.0


class OutOfGamutRange(ValueError):
    """Wavelength outside the tabulated observer range."""


class SpecOutOfBounds(ValueError):
    """Render geometry does not fit in the requested frame."""


@dataclass(frozen=True)
class CmfTable:
    """Color matching function samples (wavelength_nm, x_bar, y_bar, z_bar)."""

    samples: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        wavelengths = [s[0] for s in self.samples]
        if any(b <= a for a, b in zip(wavelengths, wavelengths[1:])):
            raise ValueError("wavelengths must be strictly increasing")
        if any(w < 0 for s in self.samples for w in s[1:]):
            raise ValueError("tristimulus weights must be non-negative")
        peak = max(self.samples, key=lambda s: s[2])[0]
        if not 550 <= peak <= 560:
            raise ValueError(f"y_bar must peak in [550, 560] nm, peaks at {peak}")

    @classmethod
    def cie_1931(cls) -> "CmfTable":
        return cls(samples=CIE_1931_CMF)

    @property
    def min_wavelength(self) -> float:
        return self.samples[0][0]

    @property
    def max_wavelength(self) -> float:
        return self.samples[-1][0]

    def interpolate(self, wavelength_nm: float) -> tuple[float, float, float]:
        if not self.min_wavelength <= wavelength_nm <= self.max_wavelength:
            raise OutOfGamutRange(
                f"{wavelength_nm} nm outside [{self.min_wavelength}, {self.max_wavelength}]"
            )
        grid = np.array([s[0] for s in self.samples])
        x = float(np.interp(wavelength_nm, grid, [s[1] for s in self.samples]))
        y = float(np.interp(wavelength_nm, grid, [s[2] for s in self.samples]))
        z = float(np.interp(wavelength_nm, grid, [s[3] for s in self.samples]))
        return x, y, z


_DEFAULT_TABLE = CmfTable.cie_1931()


def wavelength_to_rgb(wavelength_nm: float, table: CmfTable = _DEFAULT_TABLE) -> tuple[int, int, int]:
    """Perceived color of a monochromatic source as an 8-bit RGB triple.

    Chain: CMF interpolation -> XYZ -> linear RGB (sRGB primaries) ->
    clamp negatives -> normalize to max channel 1 -> gamma 1/2.2 -> 8-bit.
    """
    xyz = np.array(table.interpolate(wavelength_nm))
    rgb = _XYZ_TO_RGB @ xyz
    rgb = np.clip(rgb, 0.0, None)
    peak = rgb.max()
    if peak > 0:
        rgb = rgb / peak
    rgb = rgb**GAMMA
    return tuple(int(round(255 * v)) for v in rgb)


def intensity_to_green(intensity: float, gain: float = 1.0) -> int:
    """Saturating camera response: 255 * (1 - exp(-gain * intensity)).

    Monotone in intensity; 0 at zero intensity, approaching 255 as the
    fluorophore response saturates the channel.
    """
    if gain <= 0:
        raise ValueError(f"gain must be positive, got {gain}")
    if intensity < 0:
        raise ValueError(f"intensity must be non-negative, got {intensity}")
    return int(round(255.0 * (1.0 - math.exp(-gain * intensity))))


@dataclass(frozen=True)
class EmissionModel:
    """A fluorophore's emission peak relative to the excitation source."""

    emission_nm: float
    intensity: float = 1.0
    excitation_nm: float = 400.0

    def __post_init__(self):
        shift = self.emission_nm - self.excitation_nm
        if shift <= 0:
            raise ValueError(
                f"emission ({self.emission_nm} nm) must exceed excitation ({self.excitation_nm} nm)"
            )
        if not MIN_STOKES_SHIFT_NM <= shift <= MAX_STOKES_SHIFT_NM:
            raise ValueError(
                f"emission shift {shift} nm outside [{MIN_STOKES_SHIFT_NM}, {MAX_STOKES_SHIFT_NM}]"
            )
        if self.intensity < 0:
            raise ValueError(f"intensity must be non-negative, got {self.intensity}")

    def emission_rgb(self, table: CmfTable = _DEFAULT_TABLE) -> tuple[int, int, int]:
        return wavelength_to_rgb(self.emission_nm, table)


@dataclass(frozen=True)
class RenderSpec:
    """Geometry, colors and noise for one synthetic well photo.

    wall_ring_rgb, when set, paints an annulus over the outer 15% of the
    disk radius. Noise is per-channel Gaussian, clamped to [0, 255],
    drawn from a PCG64 stream seeded with `seed`.
    """

    width: int
    height: int
    disk_center: tuple[float, float]
    disk_radius: float
    interior_rgb: tuple[int, int, int]
    wall_ring_rgb: tuple[int, int, int] | None = None
    noise_stddev: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.noise_stddev <= MAX_NOISE_STDDEV:
            raise ValueError(f"noise_stddev must be in [0, {MAX_NOISE_STDDEV}], got {self.noise_stddev}")
        if self.disk_radius <= 0:
            raise ValueError(f"disk_radius must be positive, got {self.disk_radius}")
        for channel in self.interior_rgb + (self.wall_ring_rgb or ()):
            if not 0 <= channel <= 255:
                raise ValueError(f"channel value {channel} outside [0, 255]")


def render_well_image(spec: RenderSpec) -> RasterImage:
    """Paint the well disk (and optional wall ring) on black, plus noise.

    Deterministic for a fixed spec: identical spec (including seed) gives
    a bit-identical pixel array.
    """
    cx, cy = spec.disk_center
    r = spec.disk_radius
    if cx - r < 0 or cy - r < 0 or cx + r > spec.width - 1 or cy + r > spec.height - 1:
        raise SpecOutOfBounds(
            f"disk (center ({cx}, {cy}), radius {r}) does not fit in {spec.width}x{spec.height}"
        )
    ys = np.arange(spec.height, dtype=np.float64)[:, None]
    xs = np.arange(spec.width, dtype=np.float64)[None, :]
    dist2 = (xs - cx) ** 2 + (ys - cy) ** 2

    frame = np.zeros((spec.height, spec.width, 3), dtype=np.float64)
    if spec.wall_ring_rgb is not None:
        inner = r * (1.0 - WALL_RING_WIDTH_FRACTION)
        frame[dist2 <= inner * inner] = spec.interior_rgb
        frame[(dist2 > inner * inner) & (dist2 <= r * r)] = spec.wall_ring_rgb
    else:
        frame[dist2 <= r * r] = spec.interior_rgb

    if spec.noise_stddev > 0:
        rng = np.random.default_rng(spec.seed)
        frame = frame + rng.normal(0.0, spec.noise_stddev, frame.shape)

    pixels = np.clip(np.rint(frame), 0, 255).astype(np.uint8)
    return RasterImage(pixels=pixels)


def interior_mask(spec: RenderSpec) -> np.ndarray:
    """Boolean mask of the uniform interior (inside the ring if present)."""
    cx, cy = spec.disk_center
    r = spec.disk_radius
    if spec.wall_ring_rgb is not None:
        r = r * (1.0 - WALL_RING_WIDTH_FRACTION)
    ys = np.arange(spec.height, dtype=np.float64)[:, None]
    xs = np.arange(spec.width, dtype=np.float64)[None, :]
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
