from pathlib import Path

import numpy as np
import pytest

from pinchplots import PlotJob, SchemaError, render
from pinchplots.cli import main
from pinchplots.figures import cityscape_figure, fidelity_figure, mermin_figure
from pinchplots.io import read_csv, read_density_matrix, read_fidelity_rows

FIXTURES = Path(__file__).parent / "fixtures"
FIDELITY = FIXTURES / "fidelity_scan.csv"
MERMIN = FIXTURES / "mermin_scan.csv"
RHO = FIXTURES / "ghz3_rho.txt"
CORRELATIONS = FIXTURES / "ghz3_correlations.csv"


class TestIo:
    def test_metadata_and_rows(self):
        metadata, rows = read_csv(FIDELITY, ["state", "r", "F"])
        assert metadata["task"] == "fidelity-scan"
        assert metadata["seed"] == "2001"
        assert len(rows) == 6  # 2 gammas x 3 grid points

    def test_missing_column_diagnostics(self):
        with pytest.raises(SchemaError) as err:
            read_csv(FIDELITY, ["state", "bogus_column"])
        assert "bogus_column" in str(err.value)

    def test_fidelity_rows_grouped_by_gamma(self):
        curves = read_fidelity_rows(FIDELITY)
        assert set(curves) == {1.0, 2.0}
        for pts in curves.values():
            assert pts == sorted(pts)

    def test_density_matrix(self):
        rho = read_density_matrix(RHO)
        assert rho.shape == (8, 8)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        # high-fidelity GHZ estimate: dominant corners |HHH> and |VVV>
        assert rho[0, 0].real > 0.3 and rho[7, 7].real > 0.3
        assert abs(rho[0, 7]) > 0.3

    def test_density_matrix_schema_errors(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("4\n1 0 0 0\n")
        with pytest.raises(SchemaError):
            read_density_matrix(bad)


class TestFigures:
    def test_fidelity_one_curve_per_gamma(self):
        fig = fidelity_figure(FIDELITY)
        ax = fig.axes[0]
        _, labels = ax.get_legend_handles_labels()
        assert labels == ["gamma = 1", "gamma = 2"]
        assert len(ax.containers) == 2  # one errorbar curve per gamma

    def test_mermin_has_both_bound_lines(self):
        fig = mermin_figure(MERMIN)
        ax = fig.axes[0]
        heights = sorted(ln.get_ydata()[0] for ln in ax.lines
                         if len(set(ln.get_ydata())) == 1 and len(ln.get_xdata()) == 2)
        assert heights == [2.0, 4.0]  # classical then quantum bound for n=3

    def test_cityscape_two_panels(self):
        fig = cityscape_figure(RHO)
        assert len(fig.axes) == 2
        assert all(ax.name == "3d" for ax in fig.axes)


class TestRender:
    @pytest.mark.parametrize("kind,inputs", [
        ("fidelity-curves", (FIDELITY,)),
        ("mermin-curves", (MERMIN,)),
        ("cityscape", (RHO,)),
    ])
    def test_kinds_render_to_svg(self, tmp_path, kind, inputs):
        out = tmp_path / f"{kind}.svg"
        render(PlotJob(kind=kind, inputs=tuple(map(str, inputs)), output=str(out)))
        data = out.read_bytes()
        assert data.startswith(b"<?xml") and b"</svg>" in data

    def test_cityscape_accepts_csv_plus_rho(self, tmp_path):
        out = tmp_path / "city.svg"
        render(PlotJob(kind="cityscape", inputs=(str(CORRELATIONS), str(RHO)),
                       output=str(out)))
        assert out.exists()

    def test_deterministic_bytes(self, tmp_path):
        out1 = tmp_path / "a.svg"
        out2 = tmp_path / "b.svg"
        for out in (out1, out2):
            render(PlotJob(kind="fidelity-curves", inputs=(str(FIDELITY),),
                           output=str(out)))
        assert out1.read_bytes() == out2.read_bytes()

    def test_png_via_suffix(self, tmp_path):
        out = tmp_path / "fig.png"
        render(PlotJob(kind="mermin-curves", inputs=(str(MERMIN),),
                       output=str(out)))
        assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(SchemaError):
            render(PlotJob(kind="pie", inputs=(str(FIDELITY),),
                           output=str(tmp_path / "x.svg")))


class TestCli:
    def test_invocation(self, tmp_path):
        out = tmp_path / "fig.svg"
        assert main(["fidelity-curves", str(FIDELITY), "-o", str(out)]) == 0
        assert out.exists()

    def test_schema_mismatch_exit_code(self, tmp_path):
        assert main(["fidelity-curves", str(MERMIN),
                     "-o", str(tmp_path / "x.svg")]) == 2

    def test_format_flag(self, tmp_path):
        out = tmp_path / "fig_raster"
        assert main(["cityscape", str(RHO), "-o", str(out),
                     "--format", "png"]) == 0
        assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
