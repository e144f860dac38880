"""Command-line front-end.

Subcommands: ``repair`` (fix a matrix's positive definiteness), ``estimate``
(fit a first-stage estimator from observations), ``bench`` (scenario
benchmarks), and ``portfolio`` (rolling minimum-variance backtests).

Exit codes: 0 success, 1 usage/input error, 2 numerical non-convergence
(reports are still written in that case). All randomness flows from a single
``--seed`` flag whose default is 0, never wall-clock entropy.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io
from .exceptions import AsymmetricInputError, ConfigurationError, DimensionError
from .fspd import distance_to_input, fspd_apply
from .portfolio import BacktestSpec, backtest, synthetic_returns
from .regularizers import EstimatorConfig, fit_config, sample_cov
from .selection import CvSpec, cross_validate, default_bandwidth_grid, default_lambda_grid
from .simulation import (
    MethodSpec,
    ScenarioSpec,
    default_methods,
    run_scenario,
    sweep_min_eigenvalue,
)

USAGE_ERROR = 1
NONCONVERGED = 2


def _parse_mu(text: str):
    if text in ("sf", "s", "f", "inf"):
        return text
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError(f"--mu must be sf/s/f/inf or a number, got {text!r}")


def _parse_lam(text: str):
    if text in ("cv", "adaptive"):
        return text
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError(f"--lam must be cv/adaptive or a number, got {text!r}")


def _parse_bandwidth(text: str):
    if text == "cv":
        return text
    try:
        return int(text)
    except ValueError:
        raise ConfigurationError(f"--bandwidth must be cv or an integer, got {text!r}")


def _check_input(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"input file not found: {p}")
    return p


def _check_output(path: str) -> Path:
    p = Path(path)
    if p.parent and not p.parent.exists():
        raise ConfigurationError(f"output directory does not exist: {p.parent}")
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fspdcov", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    rp = sub.add_parser("repair", help="restore positive definiteness of a matrix CSV")
    rp.add_argument("--input", required=True)
    rp.add_argument("--output", required=True)
    rp.add_argument("--plan", default=None, help="plan sidecar path (default: OUTPUT.plan)")
    rp.add_argument("--epsilon", type=float, default=1e-2)
    rp.add_argument("--mu", default="sf", help="sf | s | f | inf | explicit value")

    ep = sub.add_parser("estimate", help="fit a regularized covariance from observations")
    ep.add_argument("--input", required=True, help="observation CSV, one row per observation")
    ep.add_argument("--header", action="store_true", help="input has a header row")
    ep.add_argument("--output", required=True)
    ep.add_argument("--family", default="threshold",
                    choices=["sample", "threshold", "banding", "tapering"])
    ep.add_argument("--rule", default="soft", choices=["hard", "soft", "scad"])
    ep.add_argument("--lam", default="cv", help="threshold value | cv | adaptive")
    ep.add_argument("--scad-a", type=float, default=3.7)
    ep.add_argument("--delta", type=float, default=2.0, help="adaptive threshold scale")
    ep.add_argument("--bandwidth", default="cv", help="bandwidth value | cv")
    ep.add_argument("--diagonal-policy", default="preserve_diagonal",
                    choices=["preserve_diagonal", "threshold_all"])
    ep.add_argument("--cv-folds", type=int, default=5)
    ep.add_argument("--repair", default="none", choices=["none", "sf", "s", "f", "inf"])
    ep.add_argument("--epsilon", type=float, default=1e-2)
    ep.add_argument("--seed", type=int, default=0)

    bp = sub.add_parser("bench", help="run a simulation scenario and write reports")
    bp.add_argument("--out", required=True, help="output path prefix")
    bp.add_argument("--truth", default="M1", choices=["M1", "M2"])
    bp.add_argument("--dist", default="gaussian", choices=["gaussian", "t5"])
    bp.add_argument("--n", type=int, default=100)
    bp.add_argument("--p", type=int, default=None)
    bp.add_argument("--reps", type=int, default=None)
    bp.add_argument("--scale", default="desk", choices=["desk", "paper"],
                    help="desk: p=100, 20 reps; paper: p=400, 100 reps")
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--epsilon", type=float, default=1e-2)
    bp.add_argument("--tau", type=float, default=1e-2)
    bp.add_argument("--cv-folds", type=int, default=5)
    bp.add_argument("--methods", default=None,
                    help="comma list: soft,fspd_sf,fspd_s,fspd_f,fspd_inf,"
                         "eig_constraint,logdet_barrier,sample,adaptive,hard,scad")
    bp.add_argument("--rel-tol", type=float, default=1e-7)
    bp.add_argument("--admm-max-iter", type=int, default=5000)
    bp.add_argument("--barrier-max-iter", type=int, default=2000)
    bp.add_argument("--sweep", default=None, choices=["threshold", "banding"],
                    help="write a min-eigenvalue-vs-parameter CSV instead of running replications")

    pp = sub.add_parser("portfolio", help="rolling minimum-variance backtest")
    pp.add_argument("--returns", default=None, help="days x assets CSV")
    pp.add_argument("--dates", action="store_true", help="returns has an ISO-date first column")
    pp.add_argument("--header", action="store_true", help="returns has a header row")
    pp.add_argument("--synthetic", default=None, metavar="DAYSxASSETS",
                    help="generate synthetic percent-scale returns, e.g. 720x30")
    pp.add_argument("--out", required=True, help="output path prefix")
    pp.add_argument("--train-window", type=int, default=60, choices=[60, 240])
    pp.add_argument("--hold-window", type=int, default=60)
    pp.add_argument("--risk-free", type=float, default=0.05,
                    help="annualized, in the returns' units")
    pp.add_argument("--family", default="threshold",
                    choices=["sample", "threshold", "banding", "tapering"])
    pp.add_argument("--rule", default="soft", choices=["hard", "soft", "scad"])
    pp.add_argument("--lam", default="adaptive")
    pp.add_argument("--bandwidth", default="0")
    pp.add_argument("--repair", default="sf", choices=["none", "sf", "s", "f", "inf"])
    pp.add_argument("--epsilon", type=float, default=1e-2)
    pp.add_argument("--cv-folds", type=int, default=5)
    pp.add_argument("--seed", type=int, default=0)
    return ap


def _cmd_repair(args) -> int:
    inp = _check_input(args.input)
    out = _check_output(args.output)
    plan_path = _check_output(args.plan) if args.plan else out.with_suffix(out.suffix + ".plan")
    m = io.load_matrix(inp)
    repaired, plan = fspd_apply(m, args.epsilon, _parse_mu(args.mu))
    distances = {
        "spectral": distance_to_input(plan, m, "spectral"),
        "frobenius_scaled": distance_to_input(plan, m, "frobenius_scaled"),
        "frobenius_unscaled": distance_to_input(plan, m, "frobenius_unscaled"),
    }
    io.save_matrix(out, repaired)
    io.write_plan(plan_path, plan, distances)
    return 0


def _estimate_config(args) -> EstimatorConfig:
    return EstimatorConfig(
        family=args.family,
        rule=args.rule,
        scad_a=getattr(args, "scad_a", 3.7),
        lam=_parse_lam(args.lam),
        adaptive_delta=getattr(args, "delta", 2.0),
        bandwidth=_parse_bandwidth(args.bandwidth),
        diagonal_policy=getattr(args, "diagonal_policy", "preserve_diagonal"),
    )


def _resolve_cv(config: EstimatorConfig, data, folds: int, seed: int):
    if config.family == "threshold" and config.lam == "cv":
        grid = default_lambda_grid(sample_cov(data))
    elif config.family in ("banding", "tapering") and config.bandwidth == "cv":
        grid = default_bandwidth_grid(data.shape[1])
        if config.family == "tapering":
            grid = grid[1:]
    else:
        return None

    def factory(value):
        return lambda train: fit_config(config, train, lam=value)

    best, _ = cross_validate(data, factory, CvSpec(folds=folds, grid=grid, rng_seed=seed))
    return best


def _cmd_estimate(args) -> int:
    inp = _check_input(args.input)
    out = _check_output(args.output)
    data = io.load_data(inp, header=args.header)
    config = _estimate_config(args)
    value = _resolve_cv(config, data, args.cv_folds, args.seed)
    est = fit_config(config, data, lam=value)
    if args.repair != "none":
        est, _ = fspd_apply(est, args.epsilon, args.repair)
    io.save_matrix(out, est)
    return 0


_EXTRA_METHODS = {
    "sample": lambda: MethodSpec("sample", EstimatorConfig(family="sample")),
    "soft": lambda: MethodSpec("soft", EstimatorConfig(family="threshold", rule="soft", lam="cv")),
    "hard": lambda: MethodSpec("hard", EstimatorConfig(family="threshold", rule="hard", lam="cv")),
    "scad": lambda: MethodSpec("scad", EstimatorConfig(family="threshold", rule="scad", lam="cv")),
    "adaptive": lambda: MethodSpec(
        "adaptive", EstimatorConfig(family="threshold", rule="soft", lam="adaptive")),
    "oracle": lambda: MethodSpec("oracle", None),
}


def _method_by_name(name: str) -> MethodSpec:
    soft_cv = EstimatorConfig(family="threshold", rule="soft", lam="cv")
    if name in _EXTRA_METHODS:
        return _EXTRA_METHODS[name]()
    if name in ("fspd_sf", "fspd_s", "fspd_f", "fspd_inf", "eig_constraint", "logdet_barrier"):
        return MethodSpec(name, soft_cv, repair=name)
    raise ConfigurationError(f"unknown method {name!r}")


def _cmd_bench(args) -> int:
    out = _check_output(args.out)
    p = args.p if args.p is not None else (400 if args.scale == "paper" else 100)
    reps = args.reps if args.reps is not None else (100 if args.scale == "paper" else 20)
    methods = default_methods()
    if args.methods:
        methods = tuple(_method_by_name(n.strip()) for n in args.methods.split(",") if n.strip())
    spec = ScenarioSpec(
        truth=args.truth,
        distribution="gaussian" if args.dist == "gaussian" else "student_t",
        n=args.n, p=p, replications=reps, rng_seed=args.seed,
        methods=methods, epsilon=args.epsilon, tau=args.tau, cv_folds=args.cv_folds,
        solver_rel_tol=args.rel_tol, admm_max_iter=args.admm_max_iter,
        barrier_max_iter=args.barrier_max_iter,
    )
    if args.sweep:
        params, curves = sweep_min_eigenvalue(spec, args.sweep)
        io.write_sweep_csv(f"{out}_sweep.csv", params, curves)
        return 0
    report = run_scenario(spec)
    io.write_summary_csv(f"{out}_summary.csv", report)
    io.write_reps_csv(f"{out}_reps.csv", report)
    io.write_timings_csv(f"{out}_timings.csv", report)
    with open(f"{out}_table.txt", "w") as fh:
        fh.write(io.format_text_table(report))
    bad = [r for r in report.records if r.converged is False or r.error]
    if bad:
        print(f"bench: {len(bad)} record(s) failed or did not converge", file=sys.stderr)
        return NONCONVERGED
    return 0


def _cmd_portfolio(args) -> int:
    out = _check_output(args.out)
    if (args.returns is None) == (args.synthetic is None):
        raise ConfigurationError("provide exactly one of --returns or --synthetic")
    if args.returns:
        returns, _dates = io.load_returns(_check_input(args.returns),
                                          dates=args.dates, header=args.header)
    else:
        try:
            days, assets = (int(v) for v in args.synthetic.lower().split("x"))
        except ValueError:
            raise ConfigurationError("--synthetic expects DAYSxASSETS, e.g. 720x30")
        returns = synthetic_returns(days, assets, seed=args.seed)
    config = EstimatorConfig(
        family=args.family, rule=args.rule, lam=_parse_lam(args.lam),
        bandwidth=_parse_bandwidth(args.bandwidth),
    )
    spec = BacktestSpec(
        returns=returns, train_window=args.train_window, hold_window=args.hold_window,
        risk_free_rate=args.risk_free, estimator=config, repair=args.repair,
        epsilon=args.epsilon, cv_folds=args.cv_folds, rng_seed=args.seed,
    )
    result = backtest(spec)
    name = f"{args.family}:{args.lam}+{args.repair}"
    io.write_portfolio_csv(f"{out}_portfolio.csv", {name: result})
    if any(p.failed for p in result.periods):
        print("portfolio: some periods failed and were skipped", file=sys.stderr)
        return NONCONVERGED
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        if args.command == "repair":
            return _cmd_repair(args)
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_portfolio(args)
    except AsymmetricInputError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_ERROR
    except (ConfigurationError, DimensionError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
