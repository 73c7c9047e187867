"""Secondary acceptance: render real study output, slopes consistent.

Regenerates the MSE-rate study CSVs through the estimator CLI (both
matching-time choices), renders them into one figure, and checks that the
sidecar slope agrees with the slope the study itself reported. Runs a few
minutes; requires the `frmc` package.
"""

import subprocess
import sys

import numpy as np
import pytest

pytest.importorskip("frmc")

from plotkit.render import read_study_csv, render


def run_study(path, tstar, seed=10):
    cmd = [
        sys.executable, "-m", "frmc.cli", "converge",
        "--preset", "example-bb", "--l", "10", "--tstar", str(tstar),
        "--N-list", ",".join(str(2**k) for k in range(8, 14)),
        "--R", "20", "--seed", str(seed), "--out", str(path),
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr


class TestCriterion10:
    def test_figure_from_rate_study_csvs(self, tmp_path):
        paths = []
        for tstar in (0.1, 0.4):
            p = tmp_path / f"study_tstar_{tstar}.csv"
            run_study(p, tstar)
            paths.append(p)
        fig = tmp_path / "mse.png"
        side = tmp_path / "mse.data.csv"
        series = render([str(p) for p in paths], str(fig), str(side))
        assert fig.exists() and fig.stat().st_size > 0
        assert side.exists()
        for s in series:
            assert s.reported_slope is not None
            gap = abs(s.fitted_slope - s.reported_slope)
            ok = gap <= 1e-9 and -1.3 <= s.fitted_slope <= -0.7
            print(
                f"[acceptance] criterion 10 ({s.label}): "
                f"{'PASS' if ok else 'FAIL'} (fitted={s.fitted_slope:.6f}, "
                f"reported gap={gap:.2e} <= 1e-9)"
            )
            assert ok

    def test_synthetic_inverse_n_slope_exact(self, tmp_path):
        ns = [2**k for k in range(8, 14)]
        p = tmp_path / "synth.csv"
        rows = ["N,epsilon,mean,bias2,variance,mse,replications"] + [
            f"{n},{float(n)**-0.4!r},0.2,0.0,{1.0 / n!r},{1.0 / n!r},20" for n in ns
        ]
        p.write_text("\n".join(rows) + "\n")
        series = read_study_csv(str(p))
        slope = series.fitted_slope
        ok = abs(slope + 1.0) <= 1e-9
        print(
            f"[acceptance] criterion 10 (synthetic 1/N): "
            f"{'PASS' if ok else 'FAIL'} (slope={slope!r})"
        )
        assert ok
