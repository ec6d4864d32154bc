import json
import math

import numpy as np
import pytest
import scipy.linalg as la

from kernelrates import harness
from kernelrates.designs import Design, grid_design, halton_points
from kernelrates.harness import (
    NOISE_SAMPLERS,
    ConvergenceReport,
    ExperimentConfig,
    ReportRow,
    emit_report,
    estimate_sq_l2_error,
    kernel_check,
    loglog_fit,
    power_function_sweep,
    read_report_csv,
    replication_seed,
    run_gp_convergence,
    run_gp_replication,
    run_krr_convergence,
)
from kernelrates.kernels import matern_for_smoothness
from kernelrates.regress import (
    NumericalError,
    Observations,
    cross_correlation,
    fit_regularized,
    gram_matrix,
    jitter_cholesky,
    lambda_schedule,
    predict,
)

SMALL_GRID = (20, 40, 60, 80)


class TestErrorEstimate:
    def test_examples(self):
        assert estimate_sq_l2_error([1, 2, 3], [1, 2, 3]) == 0.0
        assert estimate_sq_l2_error(np.zeros(4), np.full(4, 0.3)) == pytest.approx(0.09)
        assert estimate_sq_l2_error([1, 2, 3], [2, 2, 5]) == pytest.approx(5 / 3)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            estimate_sq_l2_error([1, 2], [1, 2, 3])


class TestLogLogFit:
    def test_exact_power_law(self):
        xs = 1 / np.arange(20, 160, 10)
        slope, _, r2 = loglog_fit(xs, xs**0.75)
        assert slope == pytest.approx(0.75) and r2 == pytest.approx(1.0)

    def test_two_points(self):
        assert loglog_fit([1 / 20, 1 / 80], [4e-2, 1e-2])[0] == pytest.approx(1.0)

    def test_constant(self):
        assert loglog_fit([0.1, 0.2, 0.3], [2.0, 2.0, 2.0])[0] == 0.0

    def test_errors(self):
        with pytest.raises(ValueError, match="slope needs >= 2 sizes"):
            loglog_fit([0.1], [0.2])
        with pytest.raises(ValueError):
            loglog_fit([0.1, 0.2], [0.0, 1.0])


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig(2, 3)
        assert cfg.n_grid == tuple(range(20, 151, 10))
        assert (cfg.replications, cfg.noise_variance, cfg.mu_base, cfg.test_points) == (100, 0.25, 0.1, 200)
        assert cfg.true_kernel.nu == pytest.approx(1.5)
        assert cfg.imposed_kernel.nu == pytest.approx(2.5)

    @pytest.mark.parametrize(
        "kw",
        [{"n_grid": (20, 20)}, {"n_grid": (4, 10)}, {"replications": 0},
         {"test_points": 5}, {"noise": "cauchy"}, {"seed": -1}, {"d": 4}],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ExperimentConfig(2, 2, **kw)


class TestNoise:
    @pytest.mark.parametrize("name", sorted(NOISE_SAMPLERS))
    def test_mean_and_variance(self, name):
        draws = NOISE_SAMPLERS[name](np.random.default_rng(0), 200_000, 0.25)
        assert abs(draws.mean()) < 0.005
        assert draws.var() == pytest.approx(0.25, rel=0.02)


class TestReplication:
    def test_interpolates_own_realization(self):
        cfg = ExperimentConfig(2, 2, noise_variance=0.0, mu_override=0.0, n_grid=(20, 30))
        err = run_gp_replication(cfg, 20, 123, test_design=grid_design(20))
        assert err <= 1e-10

    def test_deterministic(self):
        cfg = ExperimentConfig(1.6, 3.3)
        s = replication_seed(7, 40, 3)
        assert run_gp_replication(cfg, 40, s) == run_gp_replication(cfg, 40, replication_seed(7, 40, 3))

    def test_matches_manual_pipeline(self):
        cfg = ExperimentConfig(2.0, 3.0)
        n, seed = 30, 99
        X = grid_design(n)
        test = halton_points(200)
        allpts, inv = np.unique(np.vstack([X.points, test.points]), axis=0, return_inverse=True)
        inv = inv.ravel()
        L, _ = jitter_cholesky(gram_matrix(cfg.true_kernel, Design(allpts)))
        rng = np.random.default_rng(seed)
        z = L @ rng.standard_normal(len(allpts))
        y = z[inv[:n]] + 0.5 * rng.standard_normal(n)
        fit = fit_regularized(Observations(X, y), cfg.imposed_kernel, cfg.mu(n))
        expected = np.mean((z[inv[n:]] - predict(fit, test.points)) ** 2)
        assert run_gp_replication(cfg, n, seed) == pytest.approx(expected, rel=1e-10)

    def test_error_decays(self):
        cfg = ExperimentConfig(2, 2)
        mean = lambda n: np.mean([run_gp_replication(cfg, n, replication_seed(1, n, r)) for r in range(100)])
        assert mean(150) < mean(20)


class TestGPConvergence:
    def test_report_shape(self):
        cfg = ExperimentConfig(2, 2, n_grid=SMALL_GRID, replications=20, seed=3)
        rep = run_gp_convergence(cfg)
        assert list(rep.n_values) == list(SMALL_GRID)
        assert 0 <= rep.r2 <= 1
        assert rep.difference == pytest.approx(rep.slope - 0.75)
        assert all(r.stderr > 0 for r in rep.rows)
        assert rep.notes == ("well-specified",)

    def test_single_size(self):
        with pytest.raises(ValueError, match="slope needs >= 2 sizes"):
            run_gp_convergence(ExperimentConfig(2, 2, n_grid=(20,)))

    def test_failure_identifies_replication(self, monkeypatch):
        real = harness.run_gp_replication

        def flaky(cfg, n, seed, test_design=None):
            if n == 40 and seed.spawn_key == (40, 2):
                raise NumericalError("boom")
            return real(cfg, n, seed, test_design)

        monkeypatch.setattr(harness, "run_gp_replication", flaky)
        cfg = ExperimentConfig(2, 2, n_grid=SMALL_GRID, replications=3)
        with pytest.raises(NumericalError, match="n=40, rep=2"):
            run_gp_convergence(cfg)

    def test_parallel_equals_serial(self):
        cfg = ExperimentConfig(1.6, 3.3, n_grid=SMALL_GRID, replications=10, seed=5)
        a = emit_report(run_gp_convergence(cfg, workers=1), "json")
        b = emit_report(run_gp_convergence(cfg, workers=3), "json")
        assert a == b

    def test_seed_changes_result(self):
        a = run_gp_convergence(ExperimentConfig(2, 2, n_grid=SMALL_GRID, replications=5, seed=1))
        b = run_gp_convergence(ExperimentConfig(2, 2, n_grid=SMALL_GRID, replications=5, seed=2))
        assert a.slope != b.slope


@pytest.fixture(scope="module")
def slopes():
    out = {}
    for m0, m in [(2.0, 1.2), (2.0, 2.0), (2.0, 3.0), (3.0, 3.0), (1.6, 1.6), (1.6, 3.3)]:
        out[(m0, m)] = run_gp_convergence(ExperimentConfig(m0, m, seed=42)).slope
    return out


@pytest.mark.slow
class TestRegimeInvariants:
    """Statistical properties of full-protocol runs at a fixed seed."""

    def test_undersmoothing_penalty(self, slopes):
        assert slopes[(2.0, 1.2)] == pytest.approx((2 * 1.2 - 1) / (2 * 1.2), abs=0.1)
        assert slopes[(2.0, 1.2)] < slopes[(2.0, 2.0)]

    def test_oversmoothing_safety(self, slopes):
        assert abs(slopes[(2.0, 3.0)] - slopes[(2.0, 2.0)]) <= 0.08

    def test_lower_bound_direction(self, slopes):
        for (m0, m), s in slopes.items():
            if m >= m0:
                assert s <= (2 * m0 - 1) / (2 * m0) + 0.1


class TestKRR:
    def test_zero_target_noise_floor(self):
        n_grid, reps, noise = (20, 40), 400, 0.25
        rep = run_krr_convergence("zero", 2.0, n_grid=n_grid, replications=reps, noise_variance=noise, seed=8)
        assert rep.theoretical_slope is None
        assert rep.difference is None
        assert "slope test skipped" in rep.notes[0]
        k = matern_for_smoothness(2.0)
        test = halton_points(200)
        for row in rep.rows:
            X = grid_design(row.n)
            lam = lambda_schedule(row.n, math.inf, 2.0)  # infinite smoothness: lam = base
            S = cross_correlation(k, test.points, X.points) @ la.inv(gram_matrix(k, X) + row.n * lam * np.eye(row.n))
            floor = noise * np.sum(S**2) / 200
            assert row.mean_sq_error == pytest.approx(floor, abs=4 * row.stderr)

    def test_triangle_flags(self):
        rep = run_krr_convergence("triangle", 2.0, n_grid=SMALL_GRID, replications=5)
        assert rep.theoretical_slope == pytest.approx(0.75)
        assert rep.notes == ("rate holds up to Q(n)",)

    def test_parallel_equals_serial(self):
        kw = dict(n_grid=SMALL_GRID, replications=10, seed=4)
        a = run_krr_convergence("triangle", 0.6, workers=1, **kw)
        b = run_krr_convergence("triangle", 0.6, workers=2, **kw)
        assert emit_report(a, "csv") == emit_report(b, "csv")

    def test_validation(self):
        with pytest.raises(ValueError):
            run_krr_convergence("sawtooth", 2.0)
        with pytest.raises(ValueError):
            run_krr_convergence("triangle", 0.5)
        with pytest.raises(ValueError, match="slope needs >= 2 sizes"):
            run_krr_convergence("triangle", 2.0, n_grid=(20,))


class TestPowerSweep:
    def test_report(self):
        rep = power_function_sweep(2.0, n_grid=SMALL_GRID)
        assert rep.theoretical_slope == pytest.approx(0.75)
        assert rep.slope > 0
        assert np.all(np.diff(rep.errors) < 0)


def _report():
    rows = (ReportRow(20, 0.1, 0.01), ReportRow(40, 0.06, 0.005), ReportRow(80, 1 / 30, 0.002))
    return ConvergenceReport("r", rows, 0.75, -1.0, 0.99, 0.75, 42, {"m0": 2.0})


class TestEmit:
    def test_csv_round_trip(self, tmp_path):
        text = emit_report(_report(), "csv", tmp_path / "r.csv")
        assert (tmp_path / "r.csv").read_text() == text
        assert tuple(read_report_csv(text)) == _report().rows

    def test_json_has_seed(self):
        body = json.loads(emit_report(_report(), "json"))
        assert body["seed"] == 42
        assert body["difference"] == 0.0
        assert body["config"] == {"m0": 2.0}

    def test_plotdata(self):
        lines = emit_report(_report(), "plotdata").splitlines()
        assert len(lines) == 1 + 3
        x, y = map(float, lines[1].split(","))
        assert x == pytest.approx(math.log(1 / 20)) and y == pytest.approx(math.log(0.1))

    def test_byte_deterministic(self):
        for fmt in ("csv", "json", "plotdata"):
            assert emit_report(_report(), fmt) == emit_report(_report(), fmt)

    def test_io_error_has_path(self, tmp_path):
        bad = tmp_path / "missing" / "r.csv"
        with pytest.raises(OSError, match="missing"):
            emit_report(_report(), "csv", bad)

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            emit_report(_report(), "xml")


def test_table2_files(tmp_path):
    reports = harness.run_table2(seed=1, replications=2, n_grid=(20, 30), out_dir=tmp_path)
    assert len(reports) == 4
    names = sorted(p.name for p in tmp_path.iterdir())
    assert "table2.csv" in names and "table2.json" in names
    assert "row_m0_1.6_m_3.3.csv" in names
    summary = json.loads((tmp_path / "table2.json").read_text())
    assert summary["seed"] == 1
    assert [r["published_slope"] for r in summary["rows"]] == [0.7138, 0.7664, 0.7691, 0.7856]


def test_kernel_check_passes():
    results = kernel_check()
    assert len(results) == 8
    assert all(ok for _, ok, _ in results)
