import math

import numpy as np
import pytest

from fspdcov import io
from fspdcov.cli import main
from fspdcov.exceptions import AsymmetricInputError
from fspdcov.fspd import fspd_apply

from util_matrices import random_pd, random_symmetric


class TestMatrixRoundTrip:
    def test_lossless_17_digits(self, tmp_path):
        rng = np.random.default_rng(0)
        m = random_symmetric(rng, 9) * 1e3 + 1e-7
        m = (m + m.T) / 2
        path = tmp_path / "m.csv"
        io.save_matrix(path, m)
        back = io.load_matrix(path)
        assert np.array_equal(back, m)

    def test_asymmetric_rejected_with_magnitude(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n2.5,1.0\n")
        with pytest.raises(AsymmetricInputError) as exc:
            io.load_matrix(path)
        assert exc.value.magnitude == pytest.approx(0.5)

    def test_data_roundtrip_with_header(self, tmp_path):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((6, 3))
        path = tmp_path / "d.csv"
        io.save_data(path, x, header=["a", "b", "c"])
        back = io.load_data(path, header=True)
        assert np.array_equal(back, x)

    def test_returns_with_dates(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("2001-01-02,0.01,0.02\n2001-01-03,-0.005,0.001\n")
        r, dates = io.load_returns(path, dates=True)
        assert r.shape == (2, 2)
        assert dates == ["2001-01-02", "2001-01-03"]

    def test_plan_roundtrip(self, tmp_path):
        m = np.array([[2.0, 3.0], [3.0, 2.0]])
        _, plan = fspd_apply(m, 0.01, "sf")
        path = tmp_path / "p.plan"
        io.write_plan(path, plan, {"spectral": 1.01})
        back = io.read_plan(path)
        assert float(back["mu"]) == plan.mu
        assert float(back["alpha"]) == plan.alpha
        assert back["repaired"] == "true"
        assert float(back["distance_spectral"]) == 1.01


class TestRepairCommand:
    def test_hand_example_plan(self, tmp_path):
        inp = tmp_path / "in.csv"
        out = tmp_path / "out.csv"
        io.save_matrix(inp, np.array([[2.0, 3.0], [3.0, 2.0]]))
        code = main(["repair", "--input", str(inp), "--output", str(out),
                     "--epsilon", "0.01", "--mu", "sf"])
        assert code == 0
        plan = io.read_plan(tmp_path / "out.csv.plan")
        assert float(plan["mu"]) == pytest.approx(5.0)
        assert float(plan["alpha"]) == pytest.approx(0.8316667, abs=1e-6)
        repaired = io.load_matrix(out)
        expected, _ = fspd_apply(io.load_matrix(inp), 0.01, "sf")
        assert np.array_equal(repaired, expected)

    def test_already_pd_output_equals_input(self, tmp_path):
        rng = np.random.default_rng(2)
        m = random_pd(rng, 5, eig_low=0.5)
        inp, out = tmp_path / "in.csv", tmp_path / "out.csv"
        io.save_matrix(inp, m)
        assert main(["repair", "--input", str(inp), "--output", str(out)]) == 0
        assert np.array_equal(io.load_matrix(out), io.load_matrix(inp))
        plan = io.read_plan(tmp_path / "out.csv.plan")
        assert plan["repaired"] == "false"

    def test_input_not_mutated(self, tmp_path):
        inp, out = tmp_path / "in.csv", tmp_path / "out.csv"
        io.save_matrix(inp, np.array([[2.0, 3.0], [3.0, 2.0]]))
        before = inp.read_bytes()
        main(["repair", "--input", str(inp), "--output", str(out)])
        assert inp.read_bytes() == before

    def test_asymmetric_input_exit_1_with_magnitude(self, tmp_path, capsys):
        inp, out = tmp_path / "in.csv", tmp_path / "out.csv"
        inp.write_text("1.0,2.0\n2.5,1.0\n")
        code = main(["repair", "--input", str(inp), "--output", str(out)])
        assert code == 1
        assert "5.0" in capsys.readouterr().err  # asymmetry magnitude 5.000e-01

    def test_missing_input_exit_1(self, tmp_path):
        code = main(["repair", "--input", str(tmp_path / "none.csv"),
                     "--output", str(tmp_path / "o.csv")])
        assert code == 1

    def test_explicit_mu_value(self, tmp_path):
        inp, out = tmp_path / "in.csv", tmp_path / "out.csv"
        io.save_matrix(inp, np.array([[2.0, 3.0], [3.0, 2.0]]))
        assert main(["repair", "--input", str(inp), "--output", str(out),
                     "--mu", "6.0"]) == 0
        plan = io.read_plan(tmp_path / "out.csv.plan")
        assert float(plan["mu"]) == 6.0
        assert float(plan["alpha"]) == pytest.approx(5.99 / 7.0)


class TestEstimateCommand:
    def test_estimate_soft_cv_roundtrip(self, tmp_path):
        from fspdcov.simulation import make_m1, sample_gaussian

        x = sample_gaussian(make_m1(8), 60, seed=3)
        inp, out = tmp_path / "x.csv", tmp_path / "s.csv"
        io.save_data(inp, x)
        code = main(["estimate", "--input", str(inp), "--output", str(out),
                     "--family", "threshold", "--rule", "soft", "--lam", "cv",
                     "--seed", "4"])
        assert code == 0
        est = io.load_matrix(out)
        assert est.shape == (8, 8)

    def test_estimate_with_repair(self, tmp_path):
        from fspdcov.simulation import make_m1, sample_gaussian

        x = sample_gaussian(make_m1(25), 30, seed=5)
        inp, out = tmp_path / "x.csv", tmp_path / "s.csv"
        io.save_data(inp, x)
        code = main(["estimate", "--input", str(inp), "--output", str(out),
                     "--lam", "0.05", "--repair", "sf", "--epsilon", "0.01"])
        assert code == 0
        est = io.load_matrix(out)
        assert np.linalg.eigvalsh(est)[0] >= 0.01 - 1e-8

    def test_bad_lam_exit_1(self, tmp_path):
        inp = tmp_path / "x.csv"
        io.save_data(inp, np.eye(3))
        assert main(["estimate", "--input", str(inp),
                     "--output", str(tmp_path / "o.csv"), "--lam", "wat"]) == 1


class TestBenchCommand:
    def bench_args(self, tmp_path, prefix, extra=()):
        return ["bench", "--out", str(tmp_path / prefix), "--truth", "M1",
                "--n", "30", "--p", "20", "--reps", "2", "--seed", "7",
                "--methods", "soft,fspd_sf", *extra]

    def test_reports_written_and_deterministic(self, tmp_path):
        assert main(self.bench_args(tmp_path, "a")) == 0
        assert main(self.bench_args(tmp_path, "b")) == 0
        for suffix in ("_summary.csv", "_reps.csv", "_table.txt"):
            a = (tmp_path / f"a{suffix}").read_bytes()
            b = (tmp_path / f"b{suffix}").read_bytes()
            assert a == b, suffix
        assert (tmp_path / "a_timings.csv").exists()

    def test_summary_reparses_losslessly(self, tmp_path):
        main(self.bench_args(tmp_path, "c"))
        rows = io.read_csv_dicts(tmp_path / "c_summary.csv")
        assert {r["method"] for r in rows} == {"soft", "fspd_sf"}
        for r in rows:
            val = float(r["risk_frobenius_mean"])
            assert math.isfinite(val)
            assert io.fmt(val) == r["risk_frobenius_mean"]

    def test_nonconvergence_exit_2_reports_still_written(self, tmp_path):
        code = main(self.bench_args(tmp_path, "d",
                                    extra=["--methods", "eig_constraint",
                                           "--admm-max-iter", "1"]))
        assert code == 2
        assert (tmp_path / "d_summary.csv").exists()
        rows = io.read_csv_dicts(tmp_path / "d_reps.csv")
        assert all(r["converged"] == "false" for r in rows)

    def test_sweep(self, tmp_path):
        code = main(["bench", "--out", str(tmp_path / "s"), "--n", "30", "--p", "12",
                     "--seed", "1", "--sweep", "threshold"])
        assert code == 0
        rows = io.read_csv_dicts(tmp_path / "s_sweep.csv")
        assert len(rows) == 101
        assert {"param", "min_eig_soft", "min_eig_hard", "min_eig_scad"} <= set(rows[0])


class TestPortfolioCommand:
    def test_synthetic_run(self, tmp_path):
        code = main(["portfolio", "--synthetic", "200x6", "--out", str(tmp_path / "p"),
                     "--train-window", "60", "--hold-window", "60",
                     "--risk-free", "5.0", "--family", "sample", "--repair", "sf",
                     "--seed", "11"])
        assert code == 0
        rows = io.read_csv_dicts(tmp_path / "p_portfolio.csv")
        assert len(rows) == 1
        assert float(rows[0]["realized_risk_simple"]) > 0
        assert rows[0]["periods_failed"] == "0"

    def test_deterministic_reports(self, tmp_path):
        args = ["portfolio", "--synthetic", "200x5", "--out", None,
                "--train-window", "60", "--risk-free", "5.0",
                "--family", "sample", "--seed", "3"]
        args_a = list(args); args_a[4] = str(tmp_path / "a")
        args_b = list(args); args_b[4] = str(tmp_path / "b")
        assert main(args_a) == 0
        assert main(args_b) == 0
        assert (tmp_path / "a_portfolio.csv").read_bytes() == (tmp_path / "b_portfolio.csv").read_bytes()

    def test_requires_exactly_one_source(self, tmp_path):
        assert main(["portfolio", "--out", str(tmp_path / "x")]) == 1

    def test_returns_file(self, tmp_path):
        from fspdcov.portfolio import synthetic_returns

        r = synthetic_returns(130, 4, seed=9)
        path = tmp_path / "r.csv"
        io.save_data(path, r)
        code = main(["portfolio", "--returns", str(path), "--out", str(tmp_path / "q"),
                     "--train-window", "60", "--hold-window", "60",
                     "--risk-free", "5.0", "--family", "sample"])
        assert code == 0
