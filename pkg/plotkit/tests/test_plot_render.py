"""Rendering and sidecar behavior on synthetic inputs."""

import numpy as np
import pytest

from plotkit.cli import main
from plotkit.render import PlotError, fit_slope, read_study_csv, render, sidecar_text

HEADER = "N,epsilon,mean,bias2,variance,mse,replications"


def write_study(path, rows, slope=None):
    lines = [HEADER] + rows
    if slope is not None:
        lines.append(f"# slope={slope!r}")
    path.write_text("\n".join(lines) + "\n")


def power_law_rows(ns, scale=1.0, exponent=-1.0):
    return [
        f"{n},{float(n)**-0.4!r},0.2,0.0,{scale * float(n)**exponent!r},"
        f"{scale * float(n)**exponent!r},20"
        for n in ns
    ]


class TestSlopeFit:
    def test_exact_inverse_n(self):
        ns = np.array([2.0**k for k in range(8, 14)])
        assert abs(fit_slope(ns, 1.0 / ns) + 1.0) <= 1e-9

    def test_exact_general_power(self):
        ns = np.array([10.0, 100.0, 1000.0])
        assert fit_slope(ns, 3.0 * ns**-0.5) == pytest.approx(-0.5, abs=1e-12)


class TestReadStudyCsv:
    def test_parses_rows_and_reported_slope(self, tmp_path):
        p = tmp_path / "study.csv"
        write_study(p, power_law_rows([256, 512, 1024]), slope=-1.02)
        s = read_study_csv(str(p))
        assert s.label == "study"
        assert len(s.raw_rows) == 3
        assert s.reported_slope == -1.02
        assert s.n.tolist() == [256.0, 512.0, 1024.0]

    def test_zero_mse_rows_skipped_with_note(self, tmp_path):
        p = tmp_path / "study.csv"
        rows = power_law_rows([256, 512]) + [f"1024,{1024**-0.4!r},0.2,0.0,0.0,0.0,20"]
        write_study(p, rows)
        s = read_study_csv(str(p))
        assert s.skipped_zero == 1 and len(s.raw_rows) == 2
        assert "# skipped_zero_mse_rows: 1" in sidecar_text([s], -1.0)

    def test_missing_column_named(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("N,epsilon,mean\n256,0.1,0.2\n")
        with pytest.raises(PlotError, match="mse"):
            read_study_csv(str(p))

    def test_empty_csv_is_error(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("")
        with pytest.raises(PlotError, match="empty"):
            read_study_csv(str(p))

    def test_descending_n_rejected(self, tmp_path):
        p = tmp_path / "desc.csv"
        write_study(p, list(reversed(power_law_rows([256, 512]))))
        with pytest.raises(PlotError, match="ascending"):
            read_study_csv(str(p))


class TestRender:
    def test_two_series_figure_and_sidecar(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_study(a, power_law_rows([256, 512, 1024, 2048]))
        write_study(b, power_law_rows([256, 512, 1024, 2048], scale=0.5))
        fig, side = tmp_path / "fig.png", tmp_path / "fig.data.csv"
        series = render([str(a), str(b)], str(fig), str(side))
        assert fig.exists() and fig.stat().st_size > 0
        text = side.read_text()
        assert text.count("# series:") == 2
        for s in series:
            assert -1.3 <= s.fitted_slope <= -0.7

    def test_sidecar_echoes_input_bytes(self, tmp_path):
        p = tmp_path / "s.csv"
        rows = power_law_rows([256, 512, 1024])
        write_study(p, rows)
        side = tmp_path / "side.csv"
        render([str(p)], str(tmp_path / "f.png"), str(side))
        data_lines = [
            ln for ln in side.read_text().splitlines() if ln and not ln.startswith("#")
        ]
        assert data_lines[0] == "N,mse"
        expected = [",".join((r.split(",")[0], r.split(",")[5])) for r in rows]
        assert data_lines[1:] == expected

    def test_bad_input_writes_nothing(self, tmp_path):
        good, bad = tmp_path / "good.csv", tmp_path / "bad.csv"
        write_study(good, power_law_rows([256, 512]))
        bad.write_text("")
        fig, side = tmp_path / "f.png", tmp_path / "side.csv"
        with pytest.raises(PlotError):
            render([str(good), str(bad)], str(fig), str(side))
        assert not fig.exists() and not side.exists()


class TestCli:
    def test_end_to_end(self, tmp_path, capsys):
        p = tmp_path / "study.csv"
        write_study(p, power_law_rows([256, 512, 1024]))
        fig = tmp_path / "out.png"
        code = main([str(p), "--out", str(fig)])
        out = capsys.readouterr().out
        assert code == 0
        assert fig.exists()
        assert (tmp_path / "out.png.data.csv").exists()
        assert "fitted_slope" in out

    def test_schema_error_exit_code(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("A,B\n1,2\n")
        code = main([str(p), "--out", str(tmp_path / "f.png")])
        err = capsys.readouterr().err
        assert code == 2
        assert "N" in err
        assert not (tmp_path / "f.png").exists()
