"""Tests for the CSV-to-figure pipeline."""

import pytest
from click.testing import CliRunner

from irsce_plots.cli import main
from irsce_plots.plots import PlotSpec, SchemaError, collect_series, plot_nmse

HEADER = ("axis_value,method,trials,failures,median_nmse,mean_nmse,"
          "median_nmse_ok,mean_nmse_ok")


def _demo_csv(path, methods=("scpd",)):
    lines = [HEADER]
    for method in methods:
        for snr, med in ((0.0, 0.4), (10.0, 0.09), (20.0, 0.008)):
            lines.append(f"{snr},{method},100,0,{med},{med * 1.2},{med},{med}")
    path.write_text("\n".join(lines) + "\n")
    return path


def test_demo_csv_produces_image(tmp_path):
    csv_path = _demo_csv(tmp_path / "agg.csv")
    out = tmp_path / "fig.png"
    plot_nmse(PlotSpec(inputs=(str(csv_path),), output=str(out)))
    assert out.exists()
    assert out.stat().st_size > 0


def test_missing_column_is_schema_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("axis_value,method\n0.0,scpd\n")
    with pytest.raises(SchemaError, match="median_nmse"):
        plot_nmse(PlotSpec(inputs=(str(bad),), output=str(tmp_path / "x.png")))


def test_empty_csv_rejected(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text(HEADER + "\n")
    with pytest.raises(SchemaError, match="no data rows"):
        plot_nmse(PlotSpec(inputs=(str(empty),),
                           output=str(tmp_path / "x.png")))


def test_two_method_csv_gives_two_series(tmp_path):
    csv_path = _demo_csv(tmp_path / "agg.csv", methods=("scpd", "somp-fine"))
    spec = PlotSpec(inputs=(str(csv_path),), output=str(tmp_path / "fig.png"))
    series = collect_series(spec)
    assert set(series) == {"scpd", "somp-fine"}
    plot_nmse(spec)
    assert (tmp_path / "fig.png").stat().st_size > 0


def test_series_points_sorted_by_x(tmp_path):
    csv_path = tmp_path / "agg.csv"
    csv_path.write_text(HEADER + "\n"
                        "20.0,scpd,10,0,0.01,0.01,0.01,0.01\n"
                        "0.0,scpd,10,0,0.5,0.5,0.5,0.5\n"
                        "10.0,scpd,10,0,0.1,0.1,0.1,0.1\n")
    series = collect_series(PlotSpec(inputs=(str(csv_path),),
                                     output="unused.png"))
    assert [p[0] for p in series["scpd"]] == [0.0, 10.0, 20.0]


def test_log_scale_rejects_nonpositive(tmp_path):
    csv_path = tmp_path / "agg.csv"
    csv_path.write_text(HEADER + "\n0.0,scpd,10,0,0.0,0.0,0.0,0.0\n")
    spec = PlotSpec(inputs=(str(csv_path),), output=str(tmp_path / "x.png"))
    with pytest.raises(SchemaError, match="log-scale"):
        plot_nmse(spec)
    linear = PlotSpec(inputs=(str(csv_path),),
                      output=str(tmp_path / "ok.png"), log_y=False)
    plot_nmse(linear)
    assert (tmp_path / "ok.png").exists()


def test_multiple_inputs_concatenate(tmp_path):
    a = _demo_csv(tmp_path / "a.csv", methods=("scpd",))
    b = _demo_csv(tmp_path / "b.csv", methods=("somp-coarse",))
    series = collect_series(PlotSpec(inputs=(str(a), str(b)),
                                     output="unused.png"))
    assert set(series) == {"scpd", "somp-coarse"}


def test_cli_renders_and_reports(tmp_path):
    csv_path = _demo_csv(tmp_path / "agg.csv")
    out = tmp_path / "fig.png"
    result = CliRunner().invoke(main, [str(csv_path), "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert "wrote" in result.output
    assert out.stat().st_size > 0


def test_cli_schema_mismatch_nonzero_exit(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("foo,bar\n1,2\n")
    result = CliRunner().invoke(
        main, [str(bad), "-o", str(tmp_path / "x.png")])
    assert result.exit_code != 0
    assert "missing column" in result.output


def test_cli_custom_columns(tmp_path):
    csv_path = tmp_path / "trials.csv"
    csv_path.write_text("axis_value,trial,method,mse_iota\n"
                        "0.0,0,scpd,1e-18\n10.0,0,scpd,1e-20\n")
    out = tmp_path / "delay.png"
    result = CliRunner().invoke(main, [str(csv_path), "-o", str(out),
                                       "--y-column", "mse_iota"])
    assert result.exit_code == 0, result.output
    assert out.exists()
