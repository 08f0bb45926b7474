from pathlib import Path

import pytest
from PIL import Image

from fluorplate.cli import main
from fluorplate.imaging import analyze_well_image
from fluorplate.photometry import RenderSpec, render_well_image
from fluorplate.seriesio import read_series_csv


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_fixture(capsys, tmp_path, name) -> Path:
    code, out, err = run(capsys, "fixtures", name, "--out", str(tmp_path))
    assert code == 0 and err == ""
    return Path(out.strip())


class TestFixturesCommand:
    def test_writes_reference_series(self, capsys, tmp_path):
        path = write_fixture(capsys, tmp_path, "victor-fluorescein")
        assert path == tmp_path / "victor-fluorescein.csv"
        text = path.read_text()
        assert "11,sample,1e-11,1028" in text
        assert "12,blank,,1083" in text

    def test_device_fixture_carries_lower_bound_note(self, capsys, tmp_path):
        path = write_fixture(capsys, tmp_path, "device-fluorescein")
        text = path.read_text()
        assert "12,blank,,93.85" in text
        assert '# well 7 reading recorded only as "higher than 100"' in text

    def test_unknown_name_lists_fixtures(self, capsys, tmp_path):
        code, out, err = run(capsys, "fixtures", "bogus", "--out", str(tmp_path))
        assert code == 1
        assert "victor-fluorescein" in err and "device-fluorescein" in err


class TestLodCommand:
    def test_reference_instrument_lod(self, capsys, tmp_path):
        path = write_fixture(capsys, tmp_path, "victor-fluorescein")
        code, out, err = run(capsys, "lod", str(path), "--out", str(tmp_path))
        assert code == 0 and err == ""
        assert out.strip() == "lod=1e-10"
        report = (tmp_path / "victor-fluorescein_detection.csv").read_text()
        assert report.splitlines()[0] == "well_index,reading,relative_excess,detected"
        assert (tmp_path / "victor-fluorescein_detection.svg").exists()

    def test_camera_device_lod(self, capsys, tmp_path):
        path = write_fixture(capsys, tmp_path, "device-fluorescein")
        code, out, err = run(capsys, "lod", str(path), "--out", str(tmp_path))
        assert code == 0
        assert out.strip() == "lod=1e-7"

    def test_repeated_runs_are_byte_identical(self, capsys, tmp_path):
        path = write_fixture(capsys, tmp_path, "victor-fluorescein")
        outputs = []
        for run_dir in ("first", "second"):
            out_dir = tmp_path / run_dir
            assert run(capsys, "lod", str(path), "--out", str(out_dir))[0] == 0
            outputs.append(
                (
                    (out_dir / "victor-fluorescein_detection.csv").read_bytes(),
                    (out_dir / "victor-fluorescein_detection.svg").read_bytes(),
                )
            )
        assert outputs[0] == outputs[1]

    def test_flat_series_has_no_lod(self, capsys, tmp_path):
        csv = tmp_path / "flat.csv"
        csv.write_text(
            "well_index,role,concentration_molar,reading\n"
            "1,sample,1e-3,50\n2,sample,1e-4,50\n3,blank,,50\n"
        )
        code, out, err = run(capsys, "lod", str(csv), "--out", str(tmp_path))
        assert code == 0
        assert out.strip() == "lod=none"

    def test_schema_violation_reports_line(self, capsys, tmp_path):
        csv = tmp_path / "bad.csv"
        csv.write_text("well_index,role,concentration_molar,reading\n1,specimen,1e-3,50\n")
        code, out, err = run(capsys, "lod", str(csv), "--out", str(tmp_path))
        assert code == 1
        assert "line 2" in err

    def test_measuring_range_ceiling_excludes_top_wells(self, capsys, tmp_path):
        csv = tmp_path / "ladder.csv"
        rows = [f"{i + 1},sample,1e-{i + 1},{200 - 10 * i}" for i in range(11)]
        csv.write_text(
            "well_index,role,concentration_molar,reading\n" + "\n".join(rows) + "\n12,blank,,80\n"
        )
        code, out, err = run(capsys, "lod", str(csv), "--out", str(tmp_path), "--max-conc", "1e-3")
        assert code == 0
        report = (tmp_path / "ladder_detection.csv").read_text().splitlines()
        assert report[1].startswith("1,200,") and report[1].endswith("false")
        assert report[2].startswith("2,190,") and report[2].endswith("false")
        assert report[3].startswith("3,180,") and report[3].endswith("true")

    def test_control_baseline_when_no_blank(self, capsys, tmp_path):
        csv = tmp_path / "gfp.csv"
        csv.write_text(
            "well_index,role,concentration_molar,reading\n"
            "1,sample,m,50\n2,sample,m/10,40\n3,sample,m/100,30\n"
            "4,sample,m/1000,20\n5,sample,m/10000,10\n6,control,,25\n"
        )
        code, out, err = run(capsys, "lod", str(csv), "--out", str(tmp_path))
        assert code == 0
        assert out.strip() == "lod=m/100"

    def test_baseline_flag_overrides_auto(self, capsys, tmp_path):
        csv = tmp_path / "both.csv"
        csv.write_text(
            "well_index,role,concentration_molar,reading\n"
            "1,sample,1e-1,50\n2,sample,1e-2,40\n3,sample,1e-3,30\n"
            "4,sample,1e-4,20\n5,sample,1e-5,10\n6,control,,25\n7,blank,,5\n"
        )
        code, out, _ = run(capsys, "lod", str(csv), "--out", str(tmp_path))
        assert (code, out.strip()) == (0, "lod=1e-5")  # blank baseline: all wells clear 5 * 1.05
        code, out, _ = run(capsys, "lod", str(csv), "--out", str(tmp_path), "--baseline", "control")
        assert (code, out.strip()) == (0, "lod=1e-3")


class TestCompareCommand:
    def test_fixture_agreement(self, capsys, tmp_path):
        device = write_fixture(capsys, tmp_path, "device-fluorescein")
        victor = write_fixture(capsys, tmp_path, "victor-fluorescein")
        code, out, err = run(capsys, "compare", str(device), str(victor), "--out", str(tmp_path))
        assert code == 0 and err == ""
        assert out.strip() == "rho=0.800 n=4"
        assert (tmp_path / "comparison.csv").exists()

    def test_identical_files(self, capsys, tmp_path):
        victor = write_fixture(capsys, tmp_path, "victor-fluorescein")
        code, out, _ = run(capsys, "compare", str(victor), str(victor), "--out", str(tmp_path))
        assert code == 0
        assert out.strip() == "rho=1.000 n=4"

    def test_too_few_common_wells(self, capsys, tmp_path):
        a = tmp_path / "a.csv"
        a.write_text("well_index,role,concentration_molar,reading\n1,sample,1e-3,5\n2,blank,,1\n")
        b = tmp_path / "b.csv"
        b.write_text("well_index,role,concentration_molar,reading\n1,sample,1e-3,4\n2,blank,,1\n")
        code, out, err = run(capsys, "compare", str(a), str(b), "--out", str(tmp_path))
        assert code == 1
        assert "common wells" in err


def render_ladder_pngs(tmp_path, greens):
    paths = []
    for i, green in enumerate(greens):
        spec = RenderSpec(
            width=256,
            height=256,
            disk_center=(127.5, 127.5),
            disk_radius=40.0,
            interior_rgb=(0, green, 0),
            seed=i,
        )
        image = render_well_image(spec)
        path = tmp_path / f"well_{i + 1:02d}.png"
        Image.fromarray(image.pixels, "RGB").save(path, "PNG")
        paths.append(str(path))
    return paths


class TestAnalyzeCommand:
    def test_ladder_of_rendered_wells(self, capsys, tmp_path):
        greens = [200 - 10 * i for i in range(12)]
        paths = render_ladder_pngs(tmp_path, greens)
        out_dir = tmp_path / "out"
        code, out, err = run(capsys, "analyze", *paths, "--layout", "fluorescein", "--out", str(out_dir))
        assert code == 0 and err == ""
        series = read_series_csv(out_dir / "series.csv")
        assert len(series.records) == 12
        for record, green in zip(series.records, greens):
            assert abs(record.reading - green) <= 1.0
        profile_lines = (out_dir / "profiles.csv").read_text().splitlines()
        assert profile_lines[0].startswith("well_index,mean_r,mean_g")
        assert len(profile_lines) == 13

    def test_missing_image_names_well(self, capsys, tmp_path):
        paths = render_ladder_pngs(tmp_path, [200 - 10 * i for i in range(11)])
        code, out, err = run(capsys, "analyze", *paths, "--layout", "fluorescein", "--out", str(tmp_path))
        assert code == 1
        assert "12" in err

    def test_unreadable_file_cites_well(self, capsys, tmp_path):
        paths = render_ladder_pngs(tmp_path, [200 - 10 * i for i in range(12)])
        Path(paths[2]).write_bytes(b"deliberately not a png")
        code, out, err = run(capsys, "analyze", *paths, "--layout", "fluorescein", "--out", str(tmp_path))
        assert code == 1
        assert "well 3" in err

    def test_missing_file_cites_path(self, capsys, tmp_path):
        paths = render_ladder_pngs(tmp_path, [200 - 10 * i for i in range(12)])
        Path(paths[5]).unlink()
        code, out, err = run(capsys, "analyze", *paths, "--layout", "fluorescein", "--out", str(tmp_path))
        assert code == 1
        assert "well_06.png" in err and "well 6" in err

    def test_layout_file(self, capsys, tmp_path):
        layout_file = tmp_path / "layout.txt"
        layout_file.write_text("fold,10\nwell,1,sample,1e-3\nwell,2,blank\n")
        paths = render_ladder_pngs(tmp_path, [180, 90])
        out_dir = tmp_path / "out"
        code, out, err = run(capsys, "analyze", *paths, "--layout", str(layout_file), "--out", str(out_dir))
        assert code == 0
        series = read_series_csv(out_dir / "series.csv")
        assert [r.well_index for r in series.records] == [1, 2]


class TestRenderCommand:
    def test_deterministic_output(self, capsys, tmp_path):
        a = tmp_path / "a.png"
        b = tmp_path / "b.png"
        for path in (a, b):
            code, out, err = run(
                capsys, "render", "--green", "200", "--noise", "5", "--seed", "42",
                "--out-file", str(path),
            )
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_default_render_round_trips_through_analysis(self, capsys, tmp_path):
        path = tmp_path / "well.png"
        code, out, err = run(capsys, "render", "--green", "170", "--out-file", str(path))
        assert code == 0
        profile = analyze_well_image(path.read_bytes())
        assert profile.mean[1] == pytest.approx(170.0, abs=1.0)

    def test_out_of_bounds_disk(self, capsys, tmp_path):
        code, out, err = run(
            capsys, "render", "--radius", "300", "--out-file", str(tmp_path / "x.png")
        )
        assert code == 1
        assert "does not fit" in err


class TestConfigFile:
    def test_config_sets_margin(self, capsys, tmp_path):
        fixture = write_fixture(capsys, tmp_path, "device-fluorescein")
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# loose margin\nmargin = 0.2\n")
        code, out, _ = run(capsys, "lod", str(fixture), "--out", str(tmp_path), "--config", str(cfg))
        assert code == 0
        assert out.strip() == "lod=none"  # well 7 only clears 6.6%

    def test_flags_beat_config(self, capsys, tmp_path):
        fixture = write_fixture(capsys, tmp_path, "device-fluorescein")
        cfg = tmp_path / "run.cfg"
        cfg.write_text("margin = 0.2\n")
        code, out, _ = run(
            capsys, "lod", str(fixture), "--out", str(tmp_path), "--config", str(cfg),
            "--margin", "0.05",
        )
        assert code == 0
        assert out.strip() == "lod=1e-7"

    def test_unknown_key_rejected(self, capsys, tmp_path):
        fixture = write_fixture(capsys, tmp_path, "device-fluorescein")
        cfg = tmp_path / "run.cfg"
        cfg.write_text("margn = 0.2\n")
        code, out, err = run(capsys, "lod", str(fixture), "--out", str(tmp_path), "--config", str(cfg))
        assert code == 1
        assert "unknown key" in err
