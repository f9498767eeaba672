"""Command-line interface.

Subcommands: ``run`` (one pipeline execution), ``bench`` (experiment plan
file), ``fit`` (binned spectrum fitting), ``ackley-audit`` (failure-mode
report).  Exit codes: 0 success, 1 configuration error, 2 all runs
failed, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
import numpy as np

from . import bench, fitting
from .driver import NoValidOptimumError, ZeusConfig, zeus_run
from .objectives import get_objective, objective_names

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ALL_FAILED = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the documented contract
    # reserves 2 for all-runs-failed and uses 1 for configuration errors.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--objective", required=True, choices=objective_names())
    parser.add_argument("--dim", type=int, default=2)
    parser.add_argument("--N", type=int, default=1024)
    parser.add_argument("--range", type=float, nargs=2, metavar=("LOWER", "UPPER"),
                        default=None, help="search box (default: objective's)")
    parser.add_argument("--iter_pso", type=int, default=5)
    parser.add_argument("--iter_bfgs", type=int, default=1000)
    parser.add_argument("--iter_ls", type=int, default=20)
    parser.add_argument("--theta", type=float, default=1e-6)
    parser.add_argument("--required_c", type=int, default=None,
                        help="convergences before early stop (default: N)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=0,
                        help="parallel worker processes (0 = sequential)")
    parser.add_argument("--deterministic", action="store_true")


def _config_from_args(args) -> tuple:
    spec = get_objective(args.objective, args.dim)
    search_range = tuple(args.range) if args.range else (spec.lower, spec.upper)
    config = ZeusConfig(
        N=args.N,
        dim=args.dim,
        range=search_range,
        iter_pso=args.iter_pso,
        iter_bfgs=args.iter_bfgs,
        iter_ls=args.iter_ls,
        theta=args.theta,
        required_c=args.required_c,
        seed=args.seed,
        workers=args.workers,
        deterministic=args.deterministic,
    )
    return spec, config


def _cmd_run(args) -> int:
    spec, config = _config_from_args(args)
    result = zeus_run(spec.fn, config)
    best = result.best
    if args.json:
        payload = {
            "objective": spec.name,
            "best_x": list(best.x_final),
            "best_f": best.f_final,
            "grad_norm": best.grad_norm,
            "status": best.status,
            "converged_count": result.converged_count,
            "launched": len(result.per_run),
            "pso_best_before_bfgs": result.pso_best_before_bfgs,
            "wall_time_s": result.wall_time,
        }
        if spec.optimum_x is not None:
            payload["euclid_error"] = bench.euclidean_error(
                best.x_final, spec.optimum_x
            )
        print(json.dumps(payload))
    else:
        point = ", ".join(f"{v:.6g}" for v in best.x_final)
        print(f"best f = {best.f_final:.10g} at ({point})")
        if spec.optimum_x is not None:
            error = bench.euclidean_error(best.x_final, spec.optimum_x)
            print(f"euclidean error vs known optimum: {error:.3g}")
        print(
            f"{result.converged_count} of {len(result.per_run)} launched runs "
            f"converged in {result.wall_time:.2f}s "
            f"(swarm best before refinement: {result.pso_best_before_bfgs:.6g})"
        )
    return EXIT_OK


def _cmd_bench(args) -> int:
    plan = bench.parse_plan(args.plan, base_seed=args.seed, output=args.output)
    if plan.output is None:
        raise bench.PlanError(
            "no output path: set 'output' in [plan] or pass --output"
        )

    def progress(record):
        print(
            f"{record.experiment} rep={record.rep} "
            f"best_f={record.best_f:.6g} err={record.euclid_error:.3g} "
            f"n_correct={record.n_correct} t={record.wall_time_s:.2f}s",
            flush=True,
        )

    records = bench.run_experiment(plan, progress=progress)
    csv_path = bench.emit_results(records, "csv", plan.output.with_suffix(".csv"))
    print(f"wrote {len(records)} records to {csv_path} "
          f"and {plan.output.with_suffix('.jsonl')}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    if args.demo:
        model = fitting.falling_spectrum(scale=args.scale or 6000.0)
        edges = np.linspace(1200.0, 4800.0, 41)
        truth = (50.0, 10.0, 5.0)
        rng = np.random.default_rng(args.seed) if args.fluctuate else None
        data = fitting.generate_spectrum_data(model, truth, edges, rng=rng)
    elif args.data:
        data = fitting.load_dataset(args.data)
        scale = args.scale or 1.25 * float(data.bin_edges[-1])
        model = fitting.falling_spectrum(scale=scale)
    else:
        raise ValueError("fit needs --data FILE or --demo")
    lower = [float(v) for v in args.p_lower.split(",")]
    upper = [float(v) for v in args.p_upper.split(",")]
    outcome = fitting.fit(model, data, lower, upper, seed=args.seed)
    if args.report:
        with open(args.report, "w") as handle:
            fitting.write_report(handle, outcome)
        print(f"wrote fit report to {args.report}")
    else:
        fitting.write_report(sys.stdout, outcome)
    within = float(np.mean(np.abs(outcome.pulls) <= 2.0))
    print(f"chi_square = {outcome.chi_square:.6g}, "
          f"{within:.0%} of pulls within +-2")
    return EXIT_OK


def _cmd_ackley_audit(args) -> int:
    audit = bench.ackley_audit(
        n=args.N,
        seed=args.seed,
        theta=args.theta,
        iter_bfgs=args.iter_bfgs,
        workers=args.workers,
    )
    near = audit.diverged_near_origin
    high = audit.converged_high
    print(
        f"{len(near)} runs diverged (budget exhausted) within 0.1 of the "
        f"origin, where the true minimum's derivative does not exist"
    )
    print(
        f"{len(high)} runs claimed convergence at local minima with "
        f"f > 1 despite passing the gradient-norm test"
    )
    if near:
        i, distance = near[0]
        print(f"  example diverged run {i}: |x| = {distance:.3g}")
    if high:
        i, value = high[0]
        print(f"  example converged run {i}: f = {value:.6g}")
    print("audit " + ("FLAGS both populations" if audit.flagged
                      else "did not find both populations"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zeus", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="one pipeline execution")
    _add_config_flags(run_parser)
    run_parser.add_argument("--json", action="store_true",
                            help="machine-readable output")
    run_parser.set_defaults(func=_cmd_run)

    bench_parser = sub.add_parser("bench", help="run an experiment plan file")
    bench_parser.add_argument("--plan", required=True)
    bench_parser.add_argument("--seed", type=int, required=True,
                              help="base seed (rep r uses seed + r)")
    bench_parser.add_argument("--output", default=None,
                              help="output base path (overrides the plan)")
    bench_parser.set_defaults(func=_cmd_bench)

    fit_parser = sub.add_parser("fit", help="binned spectrum fit")
    fit_parser.add_argument("--data", default=None,
                            help="dataset file: edge_low edge_high count [sigma]")
    fit_parser.add_argument("--demo", action="store_true",
                            help="fit a synthetic spectrum instead of a file")
    fit_parser.add_argument("--fluctuate", action="store_true",
                            help="Poisson-fluctuate the demo spectrum")
    fit_parser.add_argument("--scale", type=float, default=None,
                            help="normalization scale for bin centers")
    fit_parser.add_argument("--p-lower", default="1,0,0",
                            help="comma-separated parameter lower bounds")
    fit_parser.add_argument("--p-upper", default="1000,20,10",
                            help="comma-separated parameter upper bounds")
    fit_parser.add_argument("--report", default=None,
                            help="write the fit report to this file")
    fit_parser.add_argument("--seed", type=int, default=0)
    fit_parser.set_defaults(func=_cmd_fit)

    audit_parser = sub.add_parser("ackley-audit",
                                  help="failure-mode report on 2-D Ackley")
    audit_parser.add_argument("--N", type=int, default=1000)
    audit_parser.add_argument("--seed", type=int, default=0)
    audit_parser.add_argument("--theta", type=float, default=1e-6)
    audit_parser.add_argument("--iter_bfgs", type=int, default=150)
    audit_parser.add_argument("--workers", type=int, default=0)
    audit_parser.set_defaults(func=_cmd_ackley_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    except NoValidOptimumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ALL_FAILED
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
