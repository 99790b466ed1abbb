import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .gmbench import pooled_objective, run_suite
from .gmconfig import FitConfig, worker_count
from .gmdisparity import disparity_report
from .gmerror import DatasetError, FairGMError, NotPositiveDefinite, SolverError
from .gmmetrics import RunSummary, compare_runs, pcee_gap_report
from .gmmodels import model_inputs
from .gmread import RunManifest, read_grouped_csv, read_json, read_matrix, write_grouped_csv, write_json, write_matrix
from .gmread.manifest import SCHEMA_VERSION
from .gmsolver import fit_fair, fit_locals, fit_single
from .gmsynth import simulate_gaussian, simulate_ising
from .gmtype import MODEL_NAMES, PENALTY_NAMES, SUITE_NAMES

logger = logging.getLogger("fairgm")

EXIT_USAGE = 1
EXIT_NUMERICAL = 2

# flags of `fit` that override the matching FitConfig field when given
FIT_OVERRIDES = ("lam", "tau", "gamma", "eps", "max_iter", "step0", "ell0", "penalty", "init", "seed")


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def _int_range(text: str) -> list[int]:
    """``a..b`` (inclusive) or a comma separated list."""
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a range like 2..6, got {text!r}") from None
    return _int_list(text)


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _arguments(args: argparse.Namespace) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "verbose", "quiet")}


def cmd_simulate(args: argparse.Namespace) -> int:
    out = _out_dir(args.out)
    manifest = RunManifest(command=f"simulate {args.kind}", config=_arguments(args), seed=args.seed)
    if args.dry_run:
        manifest.dry_run = True
        manifest.write(out / "manifest.json")
        return 0

    tic = time.perf_counter()
    if args.kind == "gaussian":
        ds, truth = simulate_gaussian(args.p, args.q, args.k, args.n, args.seed, n_reset=args.n_reset)
    else:
        ds, truth = simulate_ising(
            args.p, args.hubs, args.k, args.n, args.seed, burn_in=args.burn_in, thinning=args.thinning
        )
    manifest.timings["simulate"] = time.perf_counter() - tic

    write_grouped_csv(out / "data.csv", ds.data, ds.group_of_row)
    manifest.add_output(out / "data.csv")
    for k in range(1, truth.K + 1):
        if truth.kind == "gaussian":
            write_matrix(out / f"sigma_{k}.csv", truth.matrices[k - 1])
            manifest.add_output(out / f"sigma_{k}.csv")
        write_matrix(out / f"theta_{k}.csv", truth.precisions[k - 1])
        manifest.add_output(out / f"theta_{k}.csv")
    write_json(out / "truth.json", {"kind": truth.kind, "K": truth.K, "P": truth.P, "meta": truth.meta})
    manifest.add_output(out / "truth.json")

    manifest.write(out / "manifest.json")
    logger.info("simulated %s: N=%d, P=%d, K=%d -> %s", args.kind, ds.N, ds.P, ds.K, out)
    return 0


def fit_config(args: argparse.Namespace) -> FitConfig:
    """Configuration file (if any) with the command line flags on top."""
    config = FitConfig.from_file(args.config) if args.config else FitConfig()
    overrides = {name: getattr(args, name) for name in FIT_OVERRIDES if getattr(args, name) is not None}
    return config.replace(**overrides)


def cmd_fit(args: argparse.Namespace) -> int:
    out = _out_dir(args.out)
    config = fit_config(args)
    mode = "standard" if args.standard else "fair"
    manifest = RunManifest(command=f"fit {args.model} --{mode}", config=config.to_dict(), seed=config.seed)
    manifest.add_input(args.data)
    if args.config:
        manifest.add_input(args.config)

    tic = time.perf_counter()
    ds = read_grouped_csv(args.data, group_col=args.group_col, model=args.model, standardize_columns=args.standardize)
    manifest.timings["read"] = time.perf_counter() - tic
    logger.info("read %s: N=%d, P=%d, groups=%s", args.data, ds.N, ds.P, ds.labels)
    if args.dry_run:
        manifest.dry_run = True
        manifest.write(out / "manifest.json")
        return 0

    tic = time.perf_counter()
    pooled, groups = model_inputs(ds)
    local = fit_locals(args.model, ds, config)
    manifest.timings["locals"] = time.perf_counter() - tic

    tic = time.perf_counter()
    if mode == "fair":
        est, report = fit_fair(args.model, ds, config, local=local)
    else:
        est = fit_single(args.model, pooled, config)
        report = disparity_report(est.matrix, local, groups, config.penalty_kind, config.tau)
    manifest.timings["fit"] = time.perf_counter() - tic

    write_matrix(out / "theta_hat.csv", est.matrix)
    est.trace_frame().to_csv(out / "trace.csv", index=False, float_format="%.17g")
    np.savetxt(out / "adjacency.csv", est.adjacency(config.lam), fmt="%d", delimiter=",")
    locals_dir = _out_dir(out / "locals")
    for k in range(1, local.K + 1):
        write_matrix(locals_dir / f"theta_{k}.csv", local.theta(k))
        manifest.add_output(locals_dir / f"theta_{k}.csv")

    write_json(
        out / "report.json",
        {
            "schema_version": SCHEMA_VERSION,
            "model": args.model,
            "mode": mode,
            "groups": [str(label) for label in ds.labels],
            "F1": pooled_objective(est.matrix, args.model, ds, config),
            "delta_total": report.total,
            "disparity": report.to_dict(),
            "converged": est.converged,
            "NotConverged": est.not_converged,
            "iterations": est.iterations,
            "n_pd_backtracks": est.n_pd_backtracks,
            "n_descent_backtracks": est.n_descent_backtracks,
            "runtime": est.runtime,
            "is_pd": est.is_pd,
            "info": est.info,
        },
    )
    for name in ("theta_hat.csv", "trace.csv", "adjacency.csv", "report.json"):
        manifest.add_output(out / name)
    manifest.write(out / "manifest.json")
    logger.info("fit %s (%s): Delta=%.6g, converged=%s -> %s", args.model, mode, report.total, est.converged, out)
    return 0


def _run_summary(run_dir: Path, truth: list[np.ndarray] | None, lam: float, absolute: bool) -> RunSummary:
    report = read_json(run_dir / "report.json")
    per_group = None
    if truth is not None:
        theta_hat = read_matrix(run_dir / "theta_hat.csv")
        per_group = pcee_gap_report(theta_hat, truth, lam, absolute).per_group
    # NaN is stored as null
    values = {name: report.get(name) for name in ("F1", "delta_total", "runtime")}
    values = {name: float("nan") if v is None else float(v) for name, v in values.items()}
    return RunSummary(**values, pcee_per_group=per_group)


def cmd_evaluate(args: argparse.Namespace) -> int:
    out = _out_dir(args.out)
    baseline, run = Path(args.baseline), Path(args.run)
    absolute = not args.literal_pcee
    manifest = RunManifest(command="evaluate", config=_arguments(args))
    for path in (baseline / "report.json", run / "report.json", *(args.truth or ())):
        manifest.add_input(path)
    if args.dry_run:
        manifest.dry_run = True
        manifest.write(out / "manifest.json")
        return 0

    truth = [read_matrix(path) for path in args.truth] if args.truth else None
    if truth is not None and args.lam is None:
        msg = "Invalid value of '--lambda', (expected the PCEE level when --truth is given)"
        raise DatasetError(msg)
    evaluation = compare_runs(
        _run_summary(baseline, truth, args.lam, absolute),
        _run_summary(run, truth, args.lam, absolute),
        pcee_abs=absolute,
    )

    write_json(out / "eval_report.json", {"schema_version": SCHEMA_VERSION, **evaluation.to_dict()})
    pd.DataFrame([evaluation.to_row()]).to_csv(out / "eval_report.csv", index=False, float_format="%.17g")
    manifest.add_output(out / "eval_report.json")
    manifest.add_output(out / "eval_report.csv")
    manifest.write(out / "manifest.json")
    logger.info("pct_F1=%.4g, pct_Delta=%.4g", evaluation.pct_F1, evaluation.pct_delta)
    return 0


def cmd_benchmark(args: argparse.Namespace) -> int:
    out = _out_dir(args.out)
    config = FitConfig(progress=not args.quiet)
    if args.max_iter is not None:
        config = config.replace(max_iter=args.max_iter)
    grid = {"ps": args.p, "ns": args.n, "ks": args.k, "ratios": args.ratios}
    manifest = RunManifest(command=f"benchmark {args.suite}", config=config.to_dict(), seed=args.seed)
    if args.dry_run:
        manifest.dry_run = True
        manifest.write(out / "manifest.json")
        return 0

    # FAIRGM_THREADS caps an explicit --workers too
    workers = min(args.workers, worker_count(args.workers))
    tic = time.perf_counter()
    table = run_suite(args.suite, config, seed=args.seed, workers=workers, **grid)
    manifest.timings["suite"] = time.perf_counter() - tic

    table.to_csv(out / f"{args.suite}.csv", index=False, float_format="%.17g")
    write_json(
        out / f"{args.suite}.json",
        {"schema_version": SCHEMA_VERSION, "suite": args.suite, "rows": table.to_dict(orient="records")},
    )
    manifest.add_output(out / f"{args.suite}.csv")
    manifest.add_output(out / f"{args.suite}.json")
    manifest.write(out / "manifest.json")

    failed = int((table["error"] != "").sum()) if "error" in table else 0
    if failed:
        logger.error("benchmark %s: %d of %d cells failed", args.suite, failed, len(table))
        return EXIT_NUMERICAL
    return 0


def trace_violations(trace: pd.DataFrame, tol: float = 1e-10) -> list[tuple[int, int, float]]:
    """(objective k, iteration t, increase) for every F_k(t) > F_k(t-1) + tol."""
    columns = sorted((c for c in trace.columns if c.startswith("F_")), key=lambda c: int(c[2:]))
    violations = []
    for column in columns:
        values = trace[column].to_numpy(dtype=np.float64)
        increase = np.diff(values)
        for i in np.flatnonzero(increase > tol):
            violations.append((int(column[2:]), int(trace["iteration"].iloc[i + 1]), float(increase[i])))
    return violations


def cmd_validate_trace(args: argparse.Namespace) -> int:
    trace = pd.read_csv(args.trace)
    if "iteration" not in trace.columns or not any(c.startswith("F_") for c in trace.columns):
        msg = f"Invalid trace file '{args.trace}', (expected columns iteration and F_1..F_M)"
        raise DatasetError(msg)
    violations = trace_violations(trace, args.tol)
    for k, t, increase in violations:
        print(f"F_{k} increased by {increase:.3e} at iteration {t}")
    if args.out:
        out = _out_dir(args.out)
        manifest = RunManifest(command="validate-trace", config=_arguments(args))
        manifest.add_input(args.trace)
        manifest.write(out / "manifest.json")
    if violations:
        return EXIT_NUMERICAL
    print(f"{args.trace}: {len(trace)} iterations, all objectives non-increasing")
    return 0


def build_parser() -> ArgumentParser:
    p = ArgumentParser(prog="fairgm", description="Fair sparse graphical models")
    verbosity = p.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    sim = sub.add_parser("simulate", help="generate ground truth graphs and grouped samples")
    kinds = sim.add_subparsers(dest="kind", required=True)
    for kind in ("gaussian", "ising"):
        s = kinds.add_parser(kind)
        s.add_argument("--p", type=int, default=100 if kind == "gaussian" else 50)
        if kind == "gaussian":
            s.add_argument("--q", type=int, default=5, help="number of diagonal blocks")
            s.add_argument("--n-reset", type=int, default=2, help="blocks redrawn per group")
        else:
            s.add_argument("--hubs", type=int, default=3)
            s.add_argument("--burn-in", type=int, default=10_000)
            s.add_argument("--thinning", type=int, default=100)
        s.add_argument("--k", type=int, default=2)
        s.add_argument("--n", type=_int_list, default=[1000] if kind == "gaussian" else [500, 1000])
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--out", default=".")
        s.add_argument("--dry-run", action="store_true")
        s.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="fit a standard or a fair graphical model")
    fit.add_argument("model", choices=MODEL_NAMES)
    mode = fit.add_mutually_exclusive_group()
    mode.add_argument("--fair", action="store_true", default=True)
    mode.add_argument("--standard", action="store_true")
    fit.add_argument("--data", required=True)
    fit.add_argument("--group-col", default="group")
    fit.add_argument("--config", help="JSON file of FitConfig fields")
    fit.add_argument("--lambda", dest="lam", type=float)
    fit.add_argument("--tau", type=float)
    fit.add_argument("--gamma", type=float)
    fit.add_argument("--eps", type=float)
    fit.add_argument("--max-iter", type=int)
    fit.add_argument("--step0", type=float, help="first trial step of the single-objective solver")
    fit.add_argument("--ell0", type=float, help="smallest inverse step of the fair solver")
    fit.add_argument("--penalty", choices=PENALTY_NAMES)
    fit.add_argument("--init", choices=("max_disparity", "pooled", "identity"))
    fit.add_argument("--seed", type=int)
    fit.add_argument("--standardize", action="store_true")
    fit.add_argument("--out", default=".")
    fit.add_argument("--dry-run", action="store_true")
    fit.set_defaults(func=cmd_fit)

    ev = sub.add_parser("evaluate", help="compare a fair run with a standard baseline run")
    ev.add_argument("--run", required=True, help="output directory of the fair fit")
    ev.add_argument("--baseline", required=True, help="output directory of the standard fit")
    ev.add_argument("--truth", nargs="+", help="true graphs ordered by group id")
    ev.add_argument("--lambda", dest="lam", type=float)
    ev.add_argument("--literal-pcee", action="store_true", help="compare the signed estimate with lambda")
    ev.add_argument("--out", default=".")
    ev.add_argument("--dry-run", action="store_true")
    ev.set_defaults(func=cmd_evaluate)

    bench = sub.add_parser("benchmark", help="run a simulation or sensitivity suite end to end")
    bench.add_argument("suite", choices=SUITE_NAMES)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--k", type=_int_range)
    bench.add_argument("--p", type=_int_list)
    bench.add_argument("--n", type=_int_list)
    bench.add_argument("--ratios", type=_float_list)
    bench.add_argument("--max-iter", type=int)
    bench.add_argument("--workers", type=int, default=worker_count())
    bench.add_argument("--out", default=".")
    bench.add_argument("--dry-run", action="store_true")
    bench.set_defaults(func=cmd_benchmark)

    vt = sub.add_parser("validate-trace", help="check that every objective in a trace is non-increasing")
    vt.add_argument("trace")
    vt.add_argument("--tol", type=float, default=1e-10)
    vt.add_argument("--out", help="directory for the manifest")
    vt.set_defaults(func=cmd_validate_trace)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s: %(message)s")
    logging.captureWarnings(True)

    try:
        return args.func(args)
    except (SolverError, NotPositiveDefinite) as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_NUMERICAL
    except (FairGMError, FileNotFoundError, ValueError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_USAGE
