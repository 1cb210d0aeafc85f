import json

import numpy as np
import pytest

from app.cli import main
from app.handlers.bench import run_binomial_benchmark
from app.handlers.experiments import mh_acceptance, mle_check, pggn, shrinkage, slice_vs_mh
from app.sampling.models import AnnealSchedule


class TestBenchmark:
    def test_grid_structure(self):
        cells, speedup = run_binomial_benchmark(reps=2, S=40, burn=10, m=10, trials=3)
        assert {(c["rep"], c["encoding"]) for c in cells} == {
            ("cdf", "flat"), ("cdf", "multi"), ("pdf", "flat"), ("pdf", "multi")
        }
        assert all(c["rmse_mean"] > 0 and c["time_mean"] > 0 for c in cells)
        assert set(speedup) == {"cdf", "pdf"}

    def test_command(self, capsys):
        assert main(["bench-binomial", "--reps", "1", "--S", "30", "--burn", "5", "--m", "8", "--trials", "2"]) == 0
        assert "multi" in capsys.readouterr().out

    @pytest.mark.slow
    def test_rmse_band(self):
        cells, _ = run_binomial_benchmark(reps=10, S=1000, burn=100)
        for cell in cells:
            assert 0.15 <= cell["rmse_mean"] <= 0.28, cell

    @pytest.mark.slow
    def test_multiplicity_encoding_is_not_slower(self):
        # both encodings make Σnᵢ Polya proposals per sweep, so the times stay
        # close; the multiplicity encoding only saves on the β update
        _, speedup = run_binomial_benchmark(reps=2, S=300, burn=50)
        assert np.mean(list(speedup.values())) > 0.5, speedup


class TestExperiments:
    def test_slice_vs_mh_report(self):
        report = slice_vs_mh(S=60, burn=10, m=12, trials=4)
        assert len(report["mh"]["ess"]) == len(report["names"])
        assert 0.0 < report["mh"]["acceptance_rate"] <= 1.0
        assert report["slice"]["rejections"]["max"] >= report["slice"]["rejections"]["median"]
        assert set(report["lambda_lag_one"]) == {"mh", "slice"}

    def test_shrinkage_report(self):
        report = shrinkage(kappas=(1, 5), S=40, burn=10)
        assert report["kappa"] == [1.0, 5.0]
        assert len(report["iqr"]) == 2 and len(report["iqr"][0]) == len(report["names"])
        assert len(report["iqr_se"][0]) == len(report["names"])
        assert report["irrelevant"]

        nu = report["sampled_nu"]
        assert len(nu["iqr"]) == len(nu["sd"]) == len(nu["mean"]) == 2
        assert all(value > 0 for value in nu["mean"])
        assert nu["iqr_ratio"] == pytest.approx(nu["iqr"][1] / nu["iqr"][0])

    def test_mh_acceptance_report(self):
        report = mh_acceptance(kappas=(1, 20), S=30, burn=5, m=10, trials=3)
        assert report["kappa"] == [1.0, 20.0]
        for rep in ("cdf", "pdf"):
            for encoding in ("flat", "multi"):
                assert set(report[rep][encoding]) == {"1", "20"}
                assert all(0.0 <= rate <= 1.0 for rate in report[rep][encoding].values())

    def test_command_writes_report(self, tmp_path):
        out = tmp_path / "mle.json"
        assert main(["experiment", "slice-vs-mh", "--S", "40", "--burn", "10", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["name"] == "slice-vs-mh"

    @pytest.mark.slow
    def test_spread_shrinks_with_kappa(self):
        report = shrinkage(kappas=(1, 5, 20), S=4000, burn=400)
        iqr = np.array(report["iqr"])
        se = np.array(report["iqr_se"])
        for stage in range(1, iqr.shape[0]):
            combined = np.sqrt(se[stage - 1] ** 2 + se[stage] ** 2)
            assert np.all(iqr[stage] <= iqr[stage - 1] + 3.0 * combined)
        # irrelevant coefficients settle at zero by the last stage
        last = np.array(report["mean"][-1])
        sd = np.array(report["sd_fixed_nu"])
        for column in report["irrelevant"]:
            assert abs(last[column]) < max(0.05, 4.0 * sd[column] / np.sqrt(200))

    @pytest.mark.slow
    def test_nu_spread_shrinks_with_kappa(self):
        report = shrinkage(kappas=(1, 5, 10, 20), S=4000, burn=400)
        nu = report["sampled_nu"]
        # ν | β has shape r + κp′, so its spread narrows as κ grows
        assert 0.1 <= nu["iqr_ratio"] <= 0.8, nu["iqr"]
        gap = nu["iqr"][0] - nu["iqr"][-1]
        assert gap > 3.0 * np.hypot(nu["iqr_se"][0], nu["iqr_se"][-1])

    @pytest.mark.slow
    def test_acceptance_on_binary_rows(self):
        report = mh_acceptance(S=300, burn=50)
        assert report["cdf"]["flat"]["1"] > 0.85
        for rep in ("cdf", "pdf"):
            assert report[rep]["flat"]["20"] > 0.01
            # rows of multiplicity yᵢ take a single proposal far less often
            assert report[rep]["multi"]["1"] < report[rep]["flat"]["1"]

    @pytest.mark.slow
    def test_p_much_larger_than_n(self):
        report = pggn(dimensions=(100,), reps=10, S=1000, burn=100)
        assert -0.85 <= report["100"]["posterior_mean_ell_mean"] <= -0.58

    @pytest.mark.slow
    def test_annealing_reaches_mle(self):
        report = mle_check(AnnealSchedule.parse("1:500,5:500,10:500,20:2000"))
        assert report["relative_linf"] < 0.01

    @pytest.mark.slow
    def test_slice_mixes_like_mh(self):
        report = slice_vs_mh(S=3000, burn=300)
        ratio = np.median(report["slice"]["ess"]) / np.median(report["mh"]["ess"])
        assert 0.5 <= ratio <= 2.0
