"""Built-in reference series from the fluorescein benchmark runs.

Only readings that were recorded as numbers are embedded; wells whose
values exist solely as plotted curves are left out rather than digitized.
"""

from __future__ import annotations

from .plate import MolarConcentration
from .quant import MeasurementSeries, SeriesRecord


def _conc(log10: int) -> MolarConcentration:
    return MolarConcentration.from_log10(log10)


def victor_fluorescein() -> MeasurementSeries:
    """Plate-reader counts for the low end of the fluorescein ladder."""
    return MeasurementSeries(
        instrument="victor",
        records=(
            SeriesRecord.sample(9, _conc(-9), 1364.0),   # 1 nM
            SeriesRecord.sample(10, _conc(-10), 1205.0),  # 100 pM
            SeriesRecord.sample(11, _conc(-11), 1028.0),  # 10 pM
            SeriesRecord.blank(12, 1083.0),
        ),
    )


# The well-7 reading was recorded only as "higher than 100"; 100.0 is the
# conservative lower bound.
DEVICE_WELL7_NOTE = 'well 7 reading recorded only as "higher than 100"; 100.0 is the conservative lower bound'


def device_fluorescein() -> MeasurementSeries:
    """Camera green-channel means for the low end of the fluorescein ladder."""
    return MeasurementSeries(
        instrument="device",
        records=(
            SeriesRecord.sample(7, _conc(-7), 100.0),    # 100 nM
            SeriesRecord.sample(8, _conc(-8), 98.45),    # 10 nM
            SeriesRecord.sample(9, _conc(-9), 96.89),    # 1 nM
            SeriesRecord.sample(10, _conc(-10), 88.95),  # 100 pM
            SeriesRecord.sample(11, _conc(-11), 87.31),  # 10 pM
            SeriesRecord.blank(12, 93.85),
        ),
    )


FIXTURES = {
    "victor-fluorescein": victor_fluorescein,
    "device-fluorescein": device_fluorescein,
}

FIXTURE_COMMENTS = {
    "device-fluorescein": {7: DEVICE_WELL7_NOTE},
}


def fixture_series(name: str) -> MeasurementSeries:
    try:
        return FIXTURES[name]()
    except KeyError:
        known = ", ".join(sorted(FIXTURES))
        raise KeyError(f"unknown fixture {name!r}; known fixtures: {known}") from None
