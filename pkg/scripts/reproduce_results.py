#!/usr/bin/env python3
"""Desk-scale reproduction of the fluorescein benchmark analysis.

Writes both embedded reference series, resolves each instrument's limit
of detection, and reports the sensitivity gap plus the cross-instrument
rank agreement over the shared wells.
"""

import argparse
from pathlib import Path

from fluorplate.fixtures import FIXTURE_COMMENTS, device_fluorescein, victor_fluorescein
from fluorplate.quant import compare_with_reference, detection_limit
from fluorplate.seriesio import format_detection_csv, write_series_csv
from fluorplate.svgplot import detection_plot, render_svg


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results", help="output directory")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    series_by_name = {
        "victor-fluorescein": victor_fluorescein(),
        "device-fluorescein": device_fluorescein(),
    }
    lods = {}
    for name, series in series_by_name.items():
        write_series_csv(series, out / f"{name}.csv", comments=FIXTURE_COMMENTS.get(name))
        result = detection_limit(series)
        lods[name] = result.lod
        (out / f"{name}_detection.csv").write_text(format_detection_csv(series, result))
        (out / f"{name}_detection.svg").write_text(
            render_svg(detection_plot(series, result, title=f"{series.instrument} detection"))
        )
        print(f"{name}:")
        for decision in result.per_well:
            mark = "detected" if decision.detected else "below margin"
            print(f"  well {decision.well_index:2d}  excess {decision.relative_excess:+7.2%}  {mark}")
        print(f"  lod = {result.lod}")

    gap = lods["device-fluorescein"].log10_molar - lods["victor-fluorescein"].log10_molar
    print(f"\nsensitivity gap: device lod is 10^{gap} x the plate-reader lod")

    report = compare_with_reference(series_by_name["device-fluorescein"], series_by_name["victor-fluorescein"])
    print(f"rank agreement over {report.n} shared wells: rho = {report.rho:.3f}")
    print(f"\nartifacts written to {out}/")


if __name__ == "__main__":
    main()
