"""CSV interchange for measurement series and analysis reports.

Series CSV schema: header `well_index,role,concentration_molar,reading`;
role is sample/control/blank; concentration is scientific-notation mol/L
(or a symbolic token like m/100 for relative stocks) and empty for
control/blank rows. Lines starting with `#` are comments.
"""

from __future__ import annotations

import io
from pathlib import Path

from .plate import (
    BLANK,
    CONTROL,
    Sample,
    format_concentration,
    parse_concentration,
    role_name,
)
from .quant import ComparisonReport, DetectionResult, MeasurementSeries, SeriesRecord

SERIES_HEADER = "well_index,role,concentration_molar,reading"
DETECTION_HEADER = "well_index,reading,relative_excess,detected"
COMPARISON_HEADER = "well_index,device_reading,reference_reading,device_rank,reference_rank"


class SeriesFormatError(ValueError):
    """Series CSV schema violation, with the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _fmt_reading(value: float) -> str:
    return str(int(value)) if value == int(value) else repr(value)


def parse_series_csv(text: str, instrument: str = "unknown") -> MeasurementSeries:
    records: list[SeriesRecord] = []
    lines = text.splitlines()
    data_lines = [(n, line) for n, line in enumerate(lines, start=1) if line.strip() and not line.lstrip().startswith("#")]
    if not data_lines:
        raise SeriesFormatError(1, "empty series file")
    header_no, header = data_lines[0]
    if header.strip() != SERIES_HEADER:
        raise SeriesFormatError(header_no, f"expected header {SERIES_HEADER!r}, got {header.strip()!r}")
    for line_no, line in data_lines[1:]:
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 4:
            raise SeriesFormatError(line_no, f"expected 4 fields, got {len(fields)}")
        index_token, role_token, conc_token, reading_token = fields
        try:
            well_index = int(index_token)
            reading = float(reading_token)
        except ValueError as exc:
            raise SeriesFormatError(line_no, str(exc)) from exc
        role_token = role_token.lower()
        if role_token == "sample":
            if not conc_token:
                raise SeriesFormatError(line_no, "sample rows need a concentration")
            try:
                role = Sample(parse_concentration(conc_token))
            except (ValueError, ZeroDivisionError) as exc:
                raise SeriesFormatError(line_no, f"bad concentration {conc_token!r}: {exc}") from exc
        elif role_token == "control":
            role = CONTROL
        elif role_token == "blank":
            role = BLANK
        else:
            raise SeriesFormatError(line_no, f"unknown role {role_token!r}")
        try:
            records.append(SeriesRecord(well_index, role, reading))
        except ValueError as exc:
            raise SeriesFormatError(line_no, str(exc)) from exc
    try:
        return MeasurementSeries(instrument=instrument, records=tuple(records))
    except ValueError as exc:
        raise SeriesFormatError(len(lines), str(exc)) from exc


def read_series_csv(path: Path, instrument: str | None = None) -> MeasurementSeries:
    path = Path(path)
    return parse_series_csv(path.read_text(), instrument=instrument or path.stem)


def format_series_csv(series: MeasurementSeries, comments: dict[int, str] | None = None) -> str:
    """Render a series; comments maps well index -> a `#` line placed
    above that row."""
    out = io.StringIO()
    out.write(SERIES_HEADER + "\n")
    for record in series.records:
        if comments and record.well_index in comments:
            out.write(f"# {comments[record.well_index]}\n")
        conc = "" if record.concentration is None else format_concentration(record.concentration)
        out.write(f"{record.well_index},{role_name(record.role)},{conc},{_fmt_reading(record.reading)}\n")
    return out.getvalue()


def write_series_csv(series: MeasurementSeries, path: Path, comments: dict[int, str] | None = None) -> None:
    Path(path).write_text(format_series_csv(series, comments))


def format_detection_csv(series: MeasurementSeries, result: DetectionResult) -> str:
    readings = {r.well_index: r.reading for r in series.records}
    lines = [DETECTION_HEADER]
    for decision in result.per_well:
        lines.append(
            f"{decision.well_index},{_fmt_reading(readings[decision.well_index])},"
            f"{decision.relative_excess:.6f},{str(decision.detected).lower()}"
        )
    return "\n".join(lines) + "\n"


def format_comparison_csv(report: ComparisonReport) -> str:
    lines = [COMPARISON_HEADER]
    for row in report.per_well:
        lines.append(
            f"{row.well_index},{_fmt_reading(row.device_reading)},{_fmt_reading(row.reference_reading)},"
            f"{row.device_rank:g},{row.reference_rank:g}"
        )
    return "\n".join(lines) + "\n"


def lod_summary(result: DetectionResult) -> str:
    if result.lod is None:
        return "lod=none"
    return f"lod={format_concentration(result.lod)}"


def comparison_summary(report: ComparisonReport) -> str:
    return f"rho={report.rho:.3f} n={report.n}"
