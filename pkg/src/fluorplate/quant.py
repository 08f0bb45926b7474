"""Detection decisions over per-well readings.

A well counts as detected when its reading exceeds the baseline (blank or
control) by a relative margin; by default detection must also be
contiguous from the highest concentration down, so one noisy well ends
the claimed range. The limit of detection is the lowest-concentration
detected well. Cross-instrument agreement uses Spearman rank correlation:
the two instruments share no scale, only monotone ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import sqrt

from .plate import Blank, Concentration, Control, MolarConcentration, Sample, WellRole

DEFAULT_MARGIN = 0.05
DEFAULT_SATURATION_THRESHOLD = 0.01


class QuantError(Exception):
    pass


class NoBlank(QuantError):
    pass


class NonPositiveBlank(QuantError):
    pass


class AllExcluded(QuantError):
    pass


class NoControl(QuantError):
    pass


class NonPositiveControl(QuantError):
    pass


class ShapeMismatch(QuantError):
    pass


class TooFewCommonWells(QuantError):
    pass


@dataclass(frozen=True)
class SeriesRecord:
    well_index: int
    role: WellRole
    reading: float

    def __post_init__(self):
        if self.reading < 0:
            raise ValueError(f"reading must be non-negative, got {self.reading}")

    @property
    def concentration(self) -> Concentration | None:
        return self.role.concentration if isinstance(self.role, Sample) else None

    @classmethod
    def sample(cls, well_index: int, concentration: Concentration, reading: float) -> "SeriesRecord":
        return cls(well_index, Sample(concentration), reading)

    @classmethod
    def control(cls, well_index: int, reading: float) -> "SeriesRecord":
        return cls(well_index, Control(), reading)

    @classmethod
    def blank(cls, well_index: int, reading: float) -> "SeriesRecord":
        return cls(well_index, Blank(), reading)


def _strictly_greater(a: Concentration, b: Concentration) -> bool:
    try:
        return a > b
    except TypeError:
        return True  # incomparable unit systems; ordering not checkable


@dataclass(frozen=True)
class MeasurementSeries:
    """One instrument's aligned (well, role, reading) records."""

    instrument: str
    records: tuple[SeriesRecord, ...]
    excluded: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        indices = [r.well_index for r in self.records]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("records must be sorted by strictly increasing well index")
        previous = None
        for record in self.records:
            conc = record.concentration
            if conc is None:
                continue
            if previous is not None and not _strictly_greater(previous, conc):
                raise ValueError(
                    f"sample concentrations must strictly decrease; violated at well {record.well_index}"
                )
            previous = conc

    def sample_records(self) -> list[SeriesRecord]:
        return [r for r in self.records if isinstance(r.role, Sample)]

    def records_of(self, kind: type) -> list[SeriesRecord]:
        return [r for r in self.records if isinstance(r.role, kind)]

    def with_excluded(self, indices) -> "MeasurementSeries":
        return replace(self, excluded=self.excluded | frozenset(indices))


@dataclass(frozen=True)
class DetectionCriterion:
    """Relative evidence margin for calling a well detected."""

    margin: float = DEFAULT_MARGIN
    require_contiguity: bool = True

    def __post_init__(self):
        if not 0 < self.margin < 1:
            raise ValueError(f"margin must be in (0, 1), got {self.margin}")


@dataclass(frozen=True)
class WellDecision:
    well_index: int
    detected: bool
    relative_excess: float


@dataclass(frozen=True)
class DetectionResult:
    per_well: tuple[WellDecision, ...]
    lod: Concentration | None

    def detected_wells(self) -> list[int]:
        return [d.well_index for d in self.per_well if d.detected]


def _run_detection(
    series: MeasurementSeries,
    baseline: float,
    criterion: DetectionCriterion,
) -> DetectionResult:
    samples = series.sample_records()
    evaluable = [r for r in samples if r.well_index not in series.excluded]
    if not evaluable:
        raise AllExcluded("every sample well is excluded")

    decisions: list[WellDecision] = []
    lod: Concentration | None = None
    chain_intact = True
    for record in samples:
        excess = (record.reading - baseline) / baseline
        if record.well_index in series.excluded:
            decisions.append(WellDecision(record.well_index, False, excess))
            continue
        detected = excess >= criterion.margin and (chain_intact or not criterion.require_contiguity)
        if detected:
            # samples run concentration-descending, so the last detected
            # well carries the lowest detected concentration
            lod = record.concentration
        else:
            chain_intact = False
        decisions.append(WellDecision(record.well_index, detected, excess))
    return DetectionResult(per_well=tuple(decisions), lod=lod)


def detection_limit(
    series: MeasurementSeries, criterion: DetectionCriterion = DetectionCriterion()
) -> DetectionResult:
    """Detection against the water blank.

    A sample well is detected when (reading - blank) / blank >= margin
    and, with contiguity required, every higher-concentration well is
    detected too. lod is the concentration of the lowest detected well.
    """
    blanks = series.records_of(Blank)
    if len(blanks) != 1:
        raise NoBlank(f"need exactly one blank record, found {len(blanks)}")
    baseline = blanks[0].reading
    if baseline <= 0:
        raise NonPositiveBlank(f"blank reading must be positive, got {baseline}")
    return _run_detection(series, baseline, criterion)


def detect_vs_control(
    series: MeasurementSeries, criterion: DetectionCriterion = DetectionCriterion()
) -> DetectionResult:
    """Detection against the non-fluorescent control instead of the blank."""
    controls = series.records_of(Control)
    if len(controls) != 1:
        raise NoControl(f"need exactly one control record, found {len(controls)}")
    baseline = controls[0].reading
    if baseline <= 0:
        raise NonPositiveControl(f"control reading must be positive, got {baseline}")
    return _run_detection(series, baseline, criterion)


@dataclass(frozen=True)
class OrderingValidation:
    valid_prefix_len: int
    first_violation: int | None


def validate_group_ordering(high: MeasurementSeries, low: MeasurementSeries) -> OrderingValidation:
    """Length of the leading well prefix where the higher-concentration
    group actually reads above the lower one. Ties count as violations."""
    shape_high = [(r.well_index, type(r.role)) for r in high.records]
    shape_low = [(r.well_index, type(r.role)) for r in low.records]
    if shape_high != shape_low:
        raise ShapeMismatch("series must share well indices and roles")
    prefix = 0
    for record_high, record_low in zip(high.records, low.records):
        if not isinstance(record_high.role, Sample):
            continue
        if record_high.reading > record_low.reading:
            prefix += 1
        else:
            return OrderingValidation(valid_prefix_len=prefix, first_violation=record_high.well_index)
    return OrderingValidation(valid_prefix_len=prefix, first_violation=None)


def exclude_saturated(
    series: MeasurementSeries,
    device_max_conc: MolarConcentration | None = None,
    saturation_threshold: float = DEFAULT_SATURATION_THRESHOLD,
    saturation_by_well: dict[int, float] | None = None,
) -> MeasurementSeries:
    """Mark wells outside the measuring range as excluded.

    Excludes sample wells above device_max_conc, plus any well whose
    image saturation fraction (when provided) exceeds the threshold.
    Readings are preserved; only the excluded set grows.
    """
    newly: set[int] = set()
    if device_max_conc is not None:
        for record in series.sample_records():
            conc = record.concentration
            try:
                above = conc is not None and conc > device_max_conc
            except TypeError:
                continue  # symbolic concentration, not comparable
            if above:
                newly.add(record.well_index)
    if saturation_by_well:
        for well_index, fraction in saturation_by_well.items():
            if fraction > saturation_threshold:
                newly.add(well_index)
    return series.with_excluded(newly)


@dataclass(frozen=True)
class WellComparison:
    well_index: int
    device_reading: float
    reference_reading: float
    device_rank: float
    reference_rank: float


@dataclass(frozen=True)
class ComparisonReport:
    rho: float
    n: int
    per_well: tuple[WellComparison, ...]


def _average_ranks(values: list[float]) -> list[Fraction]:
    """1-based ranks with ties averaged."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks: list[Fraction] = [Fraction(0)] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = Fraction(i + 1 + j + 1, 2)
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def _spearman(x_ranks: list[Fraction], y_ranks: list[Fraction]) -> float:
    n = len(x_ranks)
    if all(r.denominator == 1 for r in x_ranks + y_ranks):
        # no ties: classic rank-difference formula, exact in rationals
        d2 = sum((a - b) ** 2 for a, b in zip(x_ranks, y_ranks))
        return float(1 - Fraction(6) * d2 / (n * (n * n - 1)))
    mean = Fraction(n + 1, 2)
    cov = sum((a - mean) * (b - mean) for a, b in zip(x_ranks, y_ranks))
    var_x = sum((a - mean) ** 2 for a in x_ranks)
    var_y = sum((b - mean) ** 2 for b in y_ranks)
    return float(cov) / sqrt(float(var_x) * float(var_y))


def compare_with_reference(device: MeasurementSeries, reference: MeasurementSeries) -> ComparisonReport:
    """Spearman rank agreement over the common sample/blank wells.

    Wells excluded in either series, and control wells, do not take part.
    Ties get average ranks.
    """
    def usable(series: MeasurementSeries) -> dict[int, SeriesRecord]:
        return {
            r.well_index: r
            for r in series.records
            if not isinstance(r.role, Control) and r.well_index not in series.excluded
        }

    device_wells = usable(device)
    reference_wells = usable(reference)
    common = sorted(
        i
        for i in device_wells.keys() & reference_wells.keys()
        if type(device_wells[i].role) is type(reference_wells[i].role)
    )
    if len(common) < 3:
        raise TooFewCommonWells(f"need at least 3 common wells, found {len(common)}")

    device_readings = [device_wells[i].reading for i in common]
    reference_readings = [reference_wells[i].reading for i in common]
    device_ranks = _average_ranks(device_readings)
    reference_ranks = _average_ranks(reference_readings)
    rho = _spearman(device_ranks, reference_ranks)
    per_well = tuple(
        WellComparison(
            well_index=i,
            device_reading=device_readings[k],
            reference_reading=reference_readings[k],
            device_rank=float(device_ranks[k]),
            reference_rank=float(reference_ranks[k]),
        )
        for k, i in enumerate(common)
    )
    return ComparisonReport(rho=rho, n=len(common), per_well=per_well)
