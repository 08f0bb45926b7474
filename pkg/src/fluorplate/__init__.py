"""Fluorescence quantification from 96-well-plate photographs.

Pipeline: photograph per well -> circular ROI segmentation -> RGB channel
statistics -> blank/control-relative detection decisions -> limit of
detection and cross-instrument rank agreement.
"""

from .imaging import (
    RasterImage,
    RgbProfile,
    SegmentationParams,
    WellRoi,
    analyze_well_image,
    extract_profile,
    load_image,
    locate_well_roi,
)
from .photometry import (
    CmfTable,
    EmissionModel,
    RenderSpec,
    intensity_to_green,
    render_well_image,
    wavelength_to_rgb,
)
from .plate import (
    MolarConcentration,
    PlateLayout,
    RelativeFactor,
    fluorescein_layout,
    gfp_layout,
    make_dilution_series,
)
from .quant import (
    ComparisonReport,
    DetectionCriterion,
    DetectionResult,
    MeasurementSeries,
    OrderingValidation,
    SeriesRecord,
    compare_with_reference,
    detect_vs_control,
    detection_limit,
    exclude_saturated,
    validate_group_ordering,
)

__version__ = "0.1.0"
