"""Command-line entry point: ``python -m kernelrates <command> ...``.

Every command accepts ``--config FILE.json`` whose keys mirror the long
option names (dashes or underscores); explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .harness import ExperimentConfig, emit_report

_DEFAULTS = {
    "d": 1,
    "n_grid": "20:150:10",
    "reps": 100,
    "noise_var": 0.25,
    "mu_base": 0.1,
    "seed": 0,
    "format": "csv",
    "phi_true": 1.0,
    "phi_imposed": 1.0,
    "test_points": 200,
    "workers": 1,
    "target": "triangle",
    "lambda_base": 1.0,
    "mu1": 1.0,
}


def parse_n_grid(text) -> tuple[int, ...]:
    """``"lo:hi:step"`` (inclusive of ``hi``) or a comma-separated list."""
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    text = str(text)
    if ":" in text:
        lo, hi, step = (int(v) for v in text.split(":"))
        if step <= 0 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad n-grid range {text!r}")
        return tuple(range(lo, hi + 1, step))
    return tuple(int(v) for v in text.split(",") if v.strip())


def _common(p, *names):
    if "d" in names:
        p.add_argument("--d", type=int)
    if "n_grid" in names:
        p.add_argument("--n-grid", dest="n_grid", help="lo:hi:step or n1,n2,...")
    if "reps" in names:
        p.add_argument("--reps", type=int)
    if "noise_var" in names:
        p.add_argument("--noise-var", dest="noise_var", type=float)
    if "seed" in names:
        p.add_argument("--seed", type=int)
    if "out" in names:
        p.add_argument("--out", help="output file (directory for table2)")
    if "format" in names:
        p.add_argument("--format", choices=("csv", "json", "plotdata"))
    if "workers" in names:
        p.add_argument("--workers", type=int, help="worker processes, 0 = all cores (results do not depend on it)")
    if "test_points" in names:
        p.add_argument("--test-points", dest="test_points", type=int)
    p.add_argument("--config", help="JSON file with default option values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kernelrates", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gp-convergence", help="GP regression convergence study")
    p.add_argument("--m0", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--mu-base", dest="mu_base", type=float)
    p.add_argument("--phi-true", dest="phi_true", type=float)
    p.add_argument("--phi-imposed", dest="phi_imposed", type=float)
    _common(p, "d", "n_grid", "reps", "noise_var", "seed", "out", "format", "workers", "test_points")

    p = sub.add_parser("krr-convergence", help="kernel ridge regression on a fixed target")
    p.add_argument("--target", choices=("triangle", "zero"))
    p.add_argument("--m", type=float)
    p.add_argument("--lambda-base", dest="lambda_base", type=float)
    p.add_argument("--phi-imposed", dest="phi_imposed", type=float)
    _common(p, "d", "n_grid", "reps", "noise_var", "seed", "out", "format", "workers", "test_points")

    p = sub.add_parser("table2", help="run the four published (m0, m) rows")
    _common(p, "n_grid", "reps", "seed", "out", "workers")

    p = sub.add_parser("power-function", help="worst-case power function decay sweep")
    p.add_argument("--m0", type=float)
    p.add_argument("--mu1", type=float)
    _common(p, "n_grid", "out", "format", "test_points")

    p = sub.add_parser("kernel-check", help="closed-form and Fourier-pair validation")
    _common(p)
    return parser


def _resolve(args) -> dict:
    opts = dict(_DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            opts.update({k.replace("-", "_"): v for k, v in json.load(fh).items()})
    opts.update({k: v for k, v in vars(args).items() if v is not None})
    return opts


def _require(opts, *keys):
    missing = [k for k in keys if opts.get(k) is None]
    if missing:
        raise SystemExit(f"missing required option(s): {', '.join('--' + k for k in missing)}")


def _emit(report, opts):
    text = emit_report(report, opts["format"], opts.get("out"))
    if not opts.get("out"):
        sys.stdout.write(text)
    summary = report.summary()
    print(
        f"{report.label}: slope={summary['slope']:.4f} theoretical={summary['theoretical_slope']} "
        f"r2={summary['r2']:.4f}",
        file=sys.stderr,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    opts = _resolve(args)
    cmd = opts["command"]

    if cmd == "gp-convergence":
        _require(opts, "m0", "m")
        cfg = ExperimentConfig(
            m0=opts["m0"], m=opts["m"], d=opts["d"], phi_true=opts["phi_true"],
            phi_imposed=opts["phi_imposed"], n_grid=parse_n_grid(opts["n_grid"]),
            replications=opts["reps"], noise_variance=opts["noise_var"],
            mu_base=opts["mu_base"], test_points=opts["test_points"], seed=opts["seed"],
        )
        _emit(harness.run_gp_convergence(cfg, workers=opts["workers"]), opts)
    elif cmd == "krr-convergence":
        _require(opts, "m")
        report = harness.run_krr_convergence(
            opts["target"], opts["m"], opts["d"], n_grid=parse_n_grid(opts["n_grid"]),
            replications=opts["reps"], noise_variance=opts["noise_var"],
            phi_imposed=opts["phi_imposed"], lambda_base=opts["lambda_base"],
            test_points=opts["test_points"], seed=opts["seed"], workers=opts["workers"],
        )
        _emit(report, opts)
    elif cmd == "table2":
        out = Path(opts.get("out") or "table2_out")
        reports = harness.run_table2(
            seed=opts["seed"], replications=opts["reps"], n_grid=parse_n_grid(opts["n_grid"]),
            workers=opts["workers"], out_dir=out,
        )
        for rep in reports:
            print(f"{rep.label}: slope={rep.slope:.4f} theoretical={rep.theoretical_slope:.4f} "
                  f"r2={rep.r2:.4f}")
    elif cmd == "power-function":
        _require(opts, "m0")
        report = harness.power_function_sweep(
            opts["m0"], opts["mu1"], parse_n_grid(opts["n_grid"]), opts["test_points"]
        )
        _emit(report, opts)
    elif cmd == "kernel-check":
        results = harness.kernel_check(verbose=True)
        return 0 if all(ok for _, ok, _ in results) else 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
