"""Monte-Carlo convergence experiments.

The GP study follows a fixed protocol: for each sample size ``n`` a closed
grid of ``n`` points is used as the design, a Matérn GP with spectral
exponent ``m0`` is drawn jointly at the design and at the first Halton
points, Gaussian noise is added to the design values, the predictor with a
Matérn kernel of exponent ``m`` and nugget :func:`~kernelrates.regress.mu_schedule`
is fitted, and the mean squared error at the Halton points is recorded.
Errors are averaged over replications and ``log E`` is regressed on
``log(1/n)``.

Every replication draws from its own stream, seeded by
``SeedSequence(seed, spawn_key=(n, rep))``, so results do not depend on the
order or the number of processes used to run them.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as la

from . import specfun
from .designs import Design, grid_design, halton_points
from .kernels import (
    MaternKernel,
    matern_eval,
    matern_for_smoothness,
    matern_spectral_density,
)
from .rates import (
    DeterministicTarget,
    RateSpec,
    ols_slope,
    theoretical_gp_slope,
    theoretical_krr_rate,
    triangle_target,
    zero_target,
)
from .regress import (
    NumericalError,
    cross_correlation,
    gram_matrix,
    jitter_cholesky,
    lambda_schedule,
    mu_schedule,
    power_function,
)

__all__ = [
    "ExperimentConfig",
    "ReportRow",
    "ConvergenceReport",
    "NOISE_SAMPLERS",
    "TABLE2_ROWS",
    "replication_seed",
    "estimate_sq_l2_error",
    "loglog_fit",
    "run_gp_replication",
    "run_gp_convergence",
    "run_krr_replication",
    "run_krr_convergence",
    "power_function_sweep",
    "run_table2",
    "emit_report",
    "kernel_check",
]

DEFAULT_N_GRID = tuple(range(20, 151, 10))

# (m0, m, published estimated slope, published R^2)
TABLE2_ROWS = (
    (1.6, 3.3, 0.7138, 0.9846),
    (2.0, 3.0, 0.7664, 0.9810),
    (2.0, 2.0, 0.7691, 0.9817),
    (3.0, 2.0, 0.7856, 0.9787),
)


def _normal_noise(rng, size, variance):
    return math.sqrt(variance) * rng.standard_normal(size)


def _uniform_noise(rng, size, variance):
    half = math.sqrt(3.0 * variance)
    return rng.uniform(-half, half, size)


def _two_point_noise(rng, size, variance):
    return math.sqrt(variance) * rng.choice((-1.0, 1.0), size)


# All three are sub-Gaussian with mean zero and the requested variance.
NOISE_SAMPLERS: dict[str, Callable] = {
    "normal": _normal_noise,
    "uniform": _uniform_noise,
    "two-point": _two_point_noise,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of one GP convergence experiment (defaults follow the published protocol)."""

    m0: float
    m: float
    d: int = 1
    phi_true: float = 1.0
    phi_imposed: float = 1.0
    n_grid: tuple = DEFAULT_N_GRID
    replications: int = 100
    noise_variance: float = 0.25
    mu_base: float = 0.1
    test_points: int = 200
    seed: int = 0
    process_variance: float = 1.0
    noise: str = "normal"
    mu_override: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        RateSpec(self.m0, self.m, self.d)
        if len(self.n_grid) < 1 or min(self.n_grid) < 5:
            raise ValueError("n_grid must be non-empty with all sizes >= 5")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.test_points < 10:
            raise ValueError("test_points must be >= 10")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")
        if self.noise not in NOISE_SAMPLERS:
            raise ValueError(f"unknown noise {self.noise!r}; choose from {sorted(NOISE_SAMPLERS)}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def true_kernel(self) -> MaternKernel:
        return matern_for_smoothness(self.m0, self.d, self.phi_true)

    @property
    def imposed_kernel(self) -> MaternKernel:
        return matern_for_smoothness(self.m, self.d, self.phi_imposed)

    def mu(self, n: int) -> float:
        if self.mu_override is not None:
            return self.mu_override
        return mu_schedule(n, self.m0, self.m, self.mu_base)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["n_grid"] = list(self.n_grid)
        return out


@dataclass(frozen=True)
class ReportRow:
    n: int
    mean_sq_error: float
    stderr: float


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-``n`` mean squared errors with the fitted and predicted slopes.

    ``difference`` is ``slope - theoretical_slope``.  `theoretical_slope`
    is ``None`` when no rate is predicted (e.g. a zero target).
    """

    label: str
    rows: tuple
    slope: float
    intercept: float
    r2: float
    theoretical_slope: float | None
    seed: int
    config: dict = field(default_factory=dict)
    notes: tuple = ()

    @property
    def difference(self) -> float | None:
        if self.theoretical_slope is None:
            return None
        return self.slope - self.theoretical_slope

    @property
    def n_values(self) -> np.ndarray:
        return np.array([r.n for r in self.rows])

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.mean_sq_error for r in self.rows])

    def summary(self) -> dict:
        return {
            "label": self.label,
            "slope": self.slope,
            "intercept": self.intercept,
            "theoretical_slope": self.theoretical_slope,
            "difference": self.difference,
            "r2": self.r2,
            "seed": self.seed,
            "notes": list(self.notes),
            "config": self.config,
        }


def replication_seed(seed: int, n: int, rep: int) -> np.random.SeedSequence:
    """Independent stream for replication `rep` at sample size `n`."""
    return np.random.SeedSequence(seed, spawn_key=(int(n), int(rep)))


def estimate_sq_l2_error(truth_values, predicted_values) -> float:
    """Mean squared difference; a quadrature estimate of the squared L2 error."""
    a = np.asarray(truth_values, dtype=float).ravel()
    b = np.asarray(predicted_values, dtype=float).ravel()
    if a.shape != b.shape or a.size < 1:
        raise ValueError(f"length mismatch: {a.size} truth vs {b.size} predicted values")
    return float(np.mean((a - b) ** 2))


def loglog_fit(xs, ys):
    """OLS of ``log ys`` on ``log xs``; return ``(slope, intercept, r2)``.

    With ``xs = 1/n`` and ``ys`` the mean squared errors, the slope is the
    empirical convergence exponent (positive when errors decay).
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape:
        raise ValueError("xs and ys must have equal length")
    if xs.size < 2:
        raise ValueError("slope needs >= 2 sizes")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs strictly positive values")
    return ols_slope(np.log(xs), np.log(ys))


def _union(train: np.ndarray, test: np.ndarray):
    """Unique rows of ``train ++ test`` and the index maps back into them."""
    allpts = np.vstack([train, test])
    uniq, inv = np.unique(allpts, axis=0, return_inverse=True)
    inv = inv.ravel()
    return uniq, inv[: len(train)], inv[len(train):]


@lru_cache(maxsize=64)
def _gp_setup(true_kernel, imposed_kernel, design, test, process_variance, mu):
    joint, i_train, i_test = _union(design.points, test.points)
    L, _ = jitter_cholesky(process_variance * gram_matrix(true_kernel, joint))
    R = gram_matrix(imposed_kernel, design)
    try:
        factor = la.cho_factor(R + mu * np.eye(design.n), lower=True)
    except la.LinAlgError as exc:
        raise NumericalError(f"R + mu I singular for n={design.n}, mu={mu:g}") from exc
    cross = cross_correlation(imposed_kernel, test.points, design.points)
    return L, i_train, i_test, factor, cross


@lru_cache(maxsize=8)
def _test_design(n_points: int, d: int) -> Design:
    return halton_points(n_points, d)


@lru_cache(maxsize=256)
def _grid(n: int, d: int) -> Design:
    return grid_design(n, d)


def run_gp_replication(cfg: ExperimentConfig, n: int, rep_seed, test_design: Design | None = None):
    """One replication's squared L2 error estimate at sample size `n`.

    `rep_seed` is an int or :class:`numpy.random.SeedSequence`.  The GP is
    sampled jointly at the design and test points so both see the same
    realization.
    """
    design = _grid(n, cfg.d)
    test = test_design if test_design is not None else _test_design(cfg.test_points, cfg.d)
    mu = cfg.mu(n)
    L, i_train, i_test, factor, cross = _gp_setup(
        cfg.true_kernel, cfg.imposed_kernel, design, test, cfg.process_variance, mu
    )
    rng = np.random.default_rng(rep_seed)
    z = L @ rng.standard_normal(L.shape[0])
    y = z[i_train] + NOISE_SAMPLERS[cfg.noise](rng, n, cfg.noise_variance)
    pred = cross @ la.cho_solve(factor, y)
    return estimate_sq_l2_error(z[i_test], pred)


def _gp_errors_at(args):
    cfg, n = args
    errs = []
    for rep in range(cfg.replications):
        try:
            errs.append(run_gp_replication(cfg, n, replication_seed(cfg.seed, n, rep)))
        except (NumericalError, np.linalg.LinAlgError) as exc:
            raise NumericalError(f"replication failed at n={n}, rep={rep}: {exc}") from exc
    return np.array(errs)


def _map(fn, items, workers):
    """Serial for ``workers`` in (None, 1); all cores for ``workers <= 0``."""
    if workers is None or workers == 1:
        return [fn(it) for it in items]
    if workers <= 0:
        workers = os.cpu_count() or 1
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _assemble(label, n_grid, err_lists, theoretical, seed, config, notes=()):
    rows = []
    for n, errs in zip(n_grid, err_lists):
        se = float(np.std(errs, ddof=1) / math.sqrt(len(errs))) if len(errs) > 1 else 0.0
        rows.append(ReportRow(int(n), float(np.mean(errs)), se))
    slope, intercept, r2 = loglog_fit(1.0 / np.array(n_grid, float), [r.mean_sq_error for r in rows])
    return ConvergenceReport(label, tuple(rows), slope, intercept, r2, theoretical, seed, config, tuple(notes))


def run_gp_convergence(cfg: ExperimentConfig, workers: int | None = 1) -> ConvergenceReport:
    """Average errors over replications for every ``n`` and fit the log-log slope.

    Sample sizes are distributed over `workers` processes; the result is
    identical for any number of workers.
    """
    if len(cfg.n_grid) < 2:
        raise ValueError("slope needs >= 2 sizes")
    errs = _map(_gp_errors_at, [(cfg, n) for n in cfg.n_grid], workers)
    spec = RateSpec(cfg.m0, cfg.m, cfg.d)
    label = f"gp m0={cfg.m0:g} m={cfg.m:g} d={cfg.d}"
    return _assemble(
        label, cfg.n_grid, errs, theoretical_gp_slope(spec), cfg.seed, cfg.to_dict(), (spec.regime,)
    )


_TARGETS = {"triangle": triangle_target, "zero": zero_target}


@dataclass(frozen=True)
class _KRRTask:
    target_name: str
    m: float
    d: int
    n: int
    replications: int
    noise_variance: float
    phi_imposed: float
    lambda_base: float
    test_points: int
    seed: int
    noise: str


@lru_cache(maxsize=64)
def _krr_setup(kernel, design, test, mu):
    R = gram_matrix(kernel, design)
    try:
        factor = la.cho_factor(R + mu * np.eye(design.n), lower=True)
    except la.LinAlgError as exc:
        raise NumericalError(f"R + mu I singular for n={design.n}, mu={mu:g}") from exc
    return factor, cross_correlation(kernel, test.points, design.points)


def run_krr_replication(target: DeterministicTarget, kernel, n: int, lam: float,
                        noise_variance: float, rep_seed, test: Design, noise: str = "normal"):
    """One squared-error estimate for kernel ridge regression on a fixed target.

    Equivalent to ``fit_regularized`` with ``mu = n * lam`` followed by
    ``predict`` at the test points; the factorisation is cached per ``n``.
    """
    design = _grid(n, target.d)
    rng = np.random.default_rng(rep_seed)
    y = target(design.points) + NOISE_SAMPLERS[noise](rng, n, noise_variance)
    factor, cross = _krr_setup(kernel, design, test, n * lam)
    return estimate_sq_l2_error(target(test.points), cross @ la.cho_solve(factor, y))


def _krr_errors_at(task: _KRRTask):
    target = _TARGETS[task.target_name]()
    kernel = matern_for_smoothness(task.m, task.d, task.phi_imposed)
    lam = lambda_schedule(task.n, target.smoothness, task.m, task.d, task.lambda_base)
    test = _test_design(task.test_points, task.d)
    errs = []
    for rep in range(task.replications):
        try:
            errs.append(run_krr_replication(
                target, kernel, task.n, lam, task.noise_variance,
                replication_seed(task.seed, task.n, rep), test, task.noise,
            ))
        except (NumericalError, np.linalg.LinAlgError) as exc:
            raise NumericalError(f"replication failed at n={task.n}, rep={rep}: {exc}") from exc
    return np.array(errs)


def run_krr_convergence(
    target: DeterministicTarget | str,
    m: float,
    d: int = 1,
    *,
    n_grid: Sequence[int] = DEFAULT_N_GRID,
    replications: int = 100,
    noise_variance: float = 0.25,
    phi_imposed: float = 1.0,
    lambda_base: float = 1.0,
    test_points: int = 200,
    seed: int = 0,
    noise: str = "normal",
    workers: int | None = 1,
) -> ConvergenceReport:
    """Kernel ridge regression on a deterministic target over an ``n`` ladder.

    The penalty is ``lambda_schedule(n, smoothness, m, d, lambda_base)`` and
    the predicted slope of the *squared* error is twice
    :func:`~kernelrates.rates.theoretical_krr_rate`.  Only the built-in
    targets (``"triangle"``, ``"zero"``) can be run in worker processes.
    The zero target has infinite smoothness, so its penalty is the constant
    `lambda_base` and its errors measure the noise floor of the smoother.
    """
    name = target if isinstance(target, str) else target.name
    if name not in _TARGETS:
        raise ValueError(f"unknown target {name!r}")
    target = _TARGETS[name]()
    if m <= d / 2:
        raise ValueError(f"imposed smoothness m={m} must exceed d/2")
    n_grid = tuple(int(n) for n in n_grid)
    if len(n_grid) < 2:
        raise ValueError("slope needs >= 2 sizes")
    tasks = [
        _KRRTask(name, m, d, n, replications, noise_variance, phi_imposed,
                 lambda_base, test_points, seed, noise)
        for n in n_grid
    ]
    errs = _map(_krr_errors_at, tasks, workers)
    notes = []
    if math.isfinite(target.smoothness):
        theoretical = 2.0 * theoretical_krr_rate(target.smoothness, m, d)
        if not target.in_sobolev_at_smoothness:
            notes.append("rate holds up to Q(n)")
    else:
        theoretical = None
        notes.append("no rate predicted; slope test skipped")
    config = {
        "target": name, "m": m, "d": d, "n_grid": list(n_grid),
        "replications": replications, "noise_variance": noise_variance,
        "phi_imposed": phi_imposed, "lambda_base": lambda_base,
        "test_points": test_points, "seed": seed, "noise": noise,
    }
    label = f"krr {name} m={m:g} d={d}"
    return _assemble(label, n_grid, errs, theoretical, seed, config, notes)


def power_function_sweep(m0: float, mu1: float = 1.0, n_grid=DEFAULT_N_GRID,
                         test_points: int = 200, phi: float = 1.0) -> ConvergenceReport:
    """Worst-case power function over Halton points on 1-d grids.

    The fitted slope of ``max_x P(x)`` against ``1/n`` is compared to the
    upper-bound exponent ``1 - 1/(2 m0)``.
    """
    kernel = matern_for_smoothness(m0, 1, phi)
    test = halton_points(test_points, 1)
    vals = [np.array([np.max(power_function(kernel, grid_design(n, 1), mu1, test.points))])
            for n in n_grid]
    config = {"m0": m0, "mu1": mu1, "n_grid": list(n_grid), "test_points": test_points, "phi": phi}
    return _assemble(f"power m0={m0:g}", tuple(n_grid), vals, 1.0 - 1.0 / (2.0 * m0), 0, config)


def run_table2(seed: int = 42, replications: int = 100, n_grid=DEFAULT_N_GRID,
               workers: int | None = 1, out_dir=None) -> list[ConvergenceReport]:
    """Run the four (m0, m) combinations of the published table.

    When `out_dir` is given, each row is written as CSV and JSON, and
    ``table2.csv`` / ``table2.json`` hold the combined summary.
    """
    reports = []
    for m0, m, _, _ in TABLE2_ROWS:
        cfg = ExperimentConfig(m0, m, n_grid=tuple(n_grid), replications=replications, seed=seed)
        reports.append(run_gp_convergence(cfg, workers=workers))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for (m0, m, _, _), rep in zip(TABLE2_ROWS, reports):
            stem = f"row_m0_{m0:g}_m_{m:g}"
            emit_report(rep, "csv", out / f"{stem}.csv")
            emit_report(rep, "json", out / f"{stem}.json")
        _write(out / "table2.csv", _table2_csv(reports))
        _write(out / "table2.json", _dump_json({
            "seed": seed,
            "rows": [
                {"m0": m0, "m": m, "published_slope": ps, "published_r2": pr2, **rep.summary()}
                for (m0, m, ps, pr2), rep in zip(TABLE2_ROWS, reports)
            ],
        }))
    return reports


def _table2_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m0", "m", "estimated_slope", "theoretical_slope", "difference", "r2",
                "published_slope", "published_r2"])
    for (m0, m, ps, pr2), rep in zip(TABLE2_ROWS, reports):
        w.writerow([m0, m, repr(rep.slope), repr(rep.theoretical_slope),
                    repr(rep.difference), repr(rep.r2), ps, pr2])
    return buf.getvalue()


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def emit_report(report: ConvergenceReport, fmt: str, path=None) -> str:
    """Serialise a report as ``csv``, ``json`` or ``plotdata`` text.

    ``csv`` has columns ``n,mean_sq_error,stderr``; ``plotdata`` has
    ``log_inv_n,log_error`` pairs.  Floats are written with ``repr`` so the
    output is exact and byte-identical for equal reports.  The text is
    written to `path` when given and returned either way.
    """
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "mean_sq_error", "stderr"])
        for r in report.rows:
            w.writerow([r.n, repr(r.mean_sq_error), repr(r.stderr)])
        text = buf.getvalue()
    elif fmt == "json":
        body = report.summary()
        body["rows"] = [asdict(r) for r in report.rows]
        text = _dump_json(body)
    elif fmt == "plotdata":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["log_inv_n", "log_error"])
        for r in report.rows:
            w.writerow([repr(math.log(1.0 / r.n)), repr(math.log(r.mean_sq_error))])
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        _write(Path(path), text)
    return text


def read_report_csv(text: str) -> list[ReportRow]:
    """Parse the ``csv`` output of :func:`emit_report`."""
    rows = list(csv.DictReader(io.StringIO(text)))
    return [ReportRow(int(r["n"]), float(r["mean_sq_error"]), float(r["stderr"])) for r in rows]


def kernel_check(verbose: bool = False) -> list[tuple[str, bool, str]]:
    """Closed-form and Fourier-pair validation of the special functions and kernels.

    Returns ``(name, passed, detail)`` triples.
    """
    from scipy import integrate

    results = []

    def record(name, err, tol):
        ok = bool(err <= tol)
        results.append((name, ok, f"max error {err:.3e} (tol {tol:g})"))

    x = np.linspace(0.1, 20.0, 400)
    pref = np.sqrt(np.pi / (2 * x)) * np.exp(-x)
    closed = {
        0.5: pref,
        1.5: pref * (1 + 1 / x),
        2.5: pref * (1 + 3 / x + 3 / x**2),
    }
    for nu, ref in closed.items():
        record(f"K_{nu} closed form", np.max(np.abs(specfun.bessel_k(nu, x) / ref - 1)), 1e-10)

    r = np.linspace(0.0, 3.0, 301)
    k05 = MaternKernel(0.5, 1.0)
    z = 2 * math.sqrt(0.5) * r
    record("Matern nu=1/2 closed form", np.max(np.abs(matern_eval(k05, r[:, None]) - np.exp(-z))), 1e-10)
    k15 = MaternKernel(1.5, 1.0)
    z = 2 * math.sqrt(1.5) * r
    record("Matern nu=3/2 closed form",
           np.max(np.abs(matern_eval(k15, r[:, None]) - (1 + z) * np.exp(-z))), 1e-10)

    for kern in (MaternKernel(0.5, 1 / math.sqrt(2)), MaternKernel(1.5, 1.0), MaternKernel(1.1, 1.0)):
        worst = 0.0
        for lag in (0.1, 0.5, 1.0, 2.0):
            val, _ = integrate.quad(
                lambda w: matern_spectral_density(kern, w, 1) / math.pi, 0, np.inf,
                weight="cos", wvar=lag, limlst=200,
            )
            worst = max(worst, abs(val - matern_eval(kern, lag)))
        record(f"Fourier pair nu={kern.nu:g} phi={kern.phi:.4g}", worst, 1e-6)

    if verbose:
        for name, ok, detail in results:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return results
