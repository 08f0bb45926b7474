"""Command-line front end: analyze, lod, compare, render, fixtures.

Settings resolve in three layers: built-in defaults, then a `key = value`
config file (--config), then explicit flags. Data goes to files and
stdout; diagnostics go to stderr, and any failure exits non-zero.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from PIL import Image

from . import imaging, photometry
from .fixtures import FIXTURE_COMMENTS, FIXTURES
from .plate import (
    LayoutFormatError,
    MolarConcentration,
    PlateLayout,
    fluorescein_layout,
    gfp_layout,
    parse_layout,
    role_name,
)
from .quant import (
    Blank,
    Control,
    DetectionCriterion,
    MeasurementSeries,
    QuantError,
    SeriesRecord,
    compare_with_reference,
    detect_vs_control,
    detection_limit,
    exclude_saturated,
)
from .seriesio import (
    SeriesFormatError,
    comparison_summary,
    format_comparison_csv,
    format_detection_csv,
    format_series_csv,
    lod_summary,
    read_series_csv,
    write_series_csv,
)
from .svgplot import detection_plot, render_svg


@dataclass
class RunConfig:
    margin: float = 0.05
    threshold_percentile: float = 0.90
    wall_exclusion: float = 0.80
    device_max_conc: MolarConcentration | None = None
    saturation_threshold: float = 0.01
    output_dir: Path = Path(".")


class CliError(Exception):
    pass


_CONFIG_KEYS = {
    "margin": "margin",
    "percentile": "threshold_percentile",
    "wall-exclusion": "wall_exclusion",
    "max-conc": "device_max_conc",
    "saturation-threshold": "saturation_threshold",
    "out": "output_dir",
}


def parse_config_file(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CliError(f"config line {line_no}: expected 'key = value', got {line!r}")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise CliError(f"config line {line_no}: unknown key {key!r}")
        entries[key] = value.strip()
    return entries


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        for key, value in parse_config_file(Path(args.config).read_text()).items():
            attr = _CONFIG_KEYS[key]
            if attr == "device_max_conc":
                setattr(config, attr, MolarConcentration.from_molar(value))
            elif attr == "output_dir":
                setattr(config, attr, Path(value))
            else:
                setattr(config, attr, float(value))
    if getattr(args, "margin", None) is not None:
        config.margin = args.margin
    if getattr(args, "percentile", None) is not None:
        config.threshold_percentile = args.percentile
    if getattr(args, "wall_exclusion", None) is not None:
        config.wall_exclusion = args.wall_exclusion
    if getattr(args, "max_conc", None) is not None:
        config.device_max_conc = MolarConcentration.from_molar(args.max_conc)
    if getattr(args, "saturation_threshold", None) is not None:
        config.saturation_threshold = args.saturation_threshold
    if getattr(args, "out", None) is not None:
        config.output_dir = Path(args.out)
    return config


def _out_dir(config: RunConfig) -> Path:
    config.output_dir.mkdir(parents=True, exist_ok=True)
    return config.output_dir


def cmd_fixtures(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    if args.name not in FIXTURES:
        known = ", ".join(sorted(FIXTURES))
        raise CliError(f"unknown fixture {args.name!r}; known fixtures: {known}")
    series = FIXTURES[args.name]()
    path = _out_dir(config) / f"{args.name}.csv"
    write_series_csv(series, path, comments=FIXTURE_COMMENTS.get(args.name))
    print(path)
    return 0


def _pick_detection(series: MeasurementSeries, baseline: str, criterion: DetectionCriterion):
    has_blank = any(isinstance(r.role, Blank) for r in series.records)
    has_control = any(isinstance(r.role, Control) for r in series.records)
    if baseline == "blank" or (baseline == "auto" and (has_blank or not has_control)):
        return detection_limit(series, criterion)
    return detect_vs_control(series, criterion)


def cmd_lod(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    series = read_series_csv(Path(args.series_csv))
    series = exclude_saturated(
        series,
        device_max_conc=config.device_max_conc,
        saturation_threshold=config.saturation_threshold,
    )
    criterion = DetectionCriterion(margin=config.margin)
    result = _pick_detection(series, args.baseline, criterion)

    out = _out_dir(config)
    stem = Path(args.series_csv).stem
    report_path = out / f"{stem}_detection.csv"
    report_path.write_text(format_detection_csv(series, result))
    svg_path = out / f"{stem}_detection.svg"
    svg_path.write_text(render_svg(detection_plot(series, result, title=f"{series.instrument} detection")))
    print(lod_summary(result))
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    device = read_series_csv(Path(args.device_csv))
    reference = read_series_csv(Path(args.reference_csv))
    report = compare_with_reference(device, reference)
    path = _out_dir(config) / "comparison.csv"
    path.write_text(format_comparison_csv(report))
    print(comparison_summary(report))
    return 0


def _resolve_layout(token: str) -> PlateLayout:
    if token == "fluorescein":
        return fluorescein_layout()
    if token in ("gfp-m", "gfp-n"):
        return gfp_layout(token[-1])
    path = Path(token)
    if not path.exists():
        raise CliError(f"unknown layout {token!r}: not a built-in name (fluorescein, gfp-m, gfp-n) or a file")
    return parse_layout(path.read_text())


def cmd_analyze(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    layout = _resolve_layout(args.layout)
    wells = layout.wells
    if len(args.images) != len(wells):
        missing = [str(index) for index, _ in wells[len(args.images):]]
        if missing:
            raise CliError(
                f"layout has {len(wells)} wells but {len(args.images)} images given; "
                f"missing images for wells {', '.join(missing)}"
            )
        raise CliError(f"layout has {len(wells)} wells but {len(args.images)} images given")

    params = imaging.SegmentationParams(
        threshold_percentile=config.threshold_percentile,
        wall_exclusion=config.wall_exclusion,
    )
    records = []
    profile_rows = []
    for (well_index, role), image_path in zip(wells, args.images):
        path = Path(image_path)
        if not path.exists():
            raise CliError(f"well {well_index}: image file not found: {path}")
        try:
            profile = imaging.analyze_well_image(path.read_bytes(), params)
        except imaging.ImagingError as exc:
            raise CliError(f"well {well_index} ({path}): {exc}") from exc
        records.append(SeriesRecord(well_index, role, profile.green_mean))
        profile_rows.append(imaging.profile_csv_row(well_index, profile))

    series = MeasurementSeries(instrument=args.instrument, records=tuple(records))
    out = _out_dir(config)
    profiles_path = out / "profiles.csv"
    profiles_path.write_text(imaging.PROFILE_CSV_HEADER + "\n" + "\n".join(profile_rows) + "\n")
    series_path = out / "series.csv"
    write_series_csv(series, series_path)
    print(profiles_path)
    print(series_path)
    return 0


def _parse_rgb(token: str) -> tuple[int, int, int]:
    parts = token.split(",")
    if len(parts) != 3:
        raise CliError(f"expected r,g,b triple, got {token!r}")
    r, g, b = (int(p) for p in parts)
    return (r, g, b)


def cmd_render(args: argparse.Namespace) -> int:
    if args.interior is not None:
        interior = _parse_rgb(args.interior)
    else:
        interior = (0, args.green, 0)
    cx = args.cx if args.cx is not None else (args.width - 1) / 2
    cy = args.cy if args.cy is not None else (args.height - 1) / 2
    spec = photometry.RenderSpec(
        width=args.width,
        height=args.height,
        disk_center=(cx, cy),
        disk_radius=args.radius,
        interior_rgb=interior,
        wall_ring_rgb=_parse_rgb(args.ring) if args.ring else None,
        noise_stddev=args.noise,
        seed=args.seed,
    )
    image = photometry.render_well_image(spec)
    path = Path(args.out_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(image.pixels, "RGB").save(path, "PNG")
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--margin", type=float, help="relative detection margin (default 0.05)")
    common.add_argument("--percentile", type=float, help="green threshold percentile (default 0.90)")
    common.add_argument("--wall-exclusion", type=float, help="sampling radius fraction (default 0.80)")
    common.add_argument("--max-conc", help="device measuring-range ceiling, mol/L (e.g. 1e-3)")
    common.add_argument("--saturation-threshold", type=float, help="saturated-pixel fraction cutoff (default 0.01)")
    common.add_argument("--out", help="output directory (default .)")
    common.add_argument("--config", help="key = value config file; flags take precedence")

    parser = argparse.ArgumentParser(
        prog="fluorplate",
        description="Quantify fluorescence from well-plate photos and estimate detection limits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="profile one image per well into a series CSV")
    p.add_argument("images", nargs="+", help="well photos in well order")
    p.add_argument("--layout", required=True, help="fluorescein, gfp-m, gfp-n, or a layout file")
    p.add_argument("--instrument", default="device", help="instrument label for the series")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("lod", parents=[common], help="detection report and limit of detection for a series")
    p.add_argument("series_csv", help="series CSV file")
    p.add_argument(
        "--baseline",
        choices=("auto", "blank", "control"),
        default="auto",
        help="baseline well: auto uses the blank, or the control when no blank exists",
    )
    p.set_defaults(func=cmd_lod)

    p = sub.add_parser("compare", parents=[common], help="rank agreement between two series")
    p.add_argument("device_csv")
    p.add_argument("reference_csv")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("render", parents=[common], help="render a synthetic well photo")
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--cx", type=float, help="disk center x (default frame center)")
    p.add_argument("--cy", type=float, help="disk center y (default frame center)")
    # keep the default disk under 10% of the frame so the default 0.90
    # threshold percentile still separates it from the background
    p.add_argument("--radius", type=float, default=40.0)
    p.add_argument("--green", type=int, default=180, help="interior green level (r=b=0)")
    p.add_argument("--interior", help="full interior r,g,b triple (overrides --green)")
    p.add_argument("--ring", help="wall ring r,g,b triple")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-file", default="well.png", help="output PNG path")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("fixtures", parents=[common], help="write a built-in reference series as CSV")
    p.add_argument("name", help="victor-fluorescein or device-fluorescein")
    p.set_defaults(func=cmd_fixtures)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        CliError,
        QuantError,
        SeriesFormatError,
        LayoutFormatError,
        imaging.ImagingError,
        photometry.SpecOutOfBounds,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
