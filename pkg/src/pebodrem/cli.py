"""``observe`` command line entry point."""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, NumericalFailure
from .models import BUILTIN_MODELS
from .scenario import (ScenarioConfig, convergence_metrics, load_config, model_for, run_scenario,
                       write_csv)

log = logging.getLogger("pebodrem")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _emit(config: ScenarioConfig, out):
    model = model_for(config)
    run = run_scenario(model, config)
    target = out or config.out_path
    if target:
        write_csv(run, target)
        log.info("wrote %d records to %s", len(run), target)
    else:
        write_csv(run, sys.stdout)
    metrics = convergence_metrics(run)
    for line in metrics.summary_lines():
        print(line, file=sys.stderr)
    return metrics


def _with_overrides(config: ScenarioConfig, args) -> ScenarioConfig:
    changes = {}
    if getattr(args, "case", None):
        changes["delay_case"] = args.case
    if getattr(args, "gamma", None) is not None:
        changes["gamma"] = args.gamma
    if getattr(args, "T", None) is not None:
        changes["T"] = args.T
    if getattr(args, "h", None) is not None:
        changes["h"] = args.h
    return replace(config, **changes).validate()


def cmd_run(args):
    config = _with_overrides(load_config(args.config), args)
    _emit(config, args.out)


def cmd_paper(args):
    config = _with_overrides(ScenarioConfig(model_id=args.model), args)
    _emit(config, args.out)


def _sweep_one(config: ScenarioConfig):
    run = run_scenario(model_for(config), config)
    if config.out_path:
        write_csv(run, config.out_path)
    return config.gamma, convergence_metrics(run)


def _gamma_path(out_path, gamma):
    if not out_path:
        return None
    p = Path(out_path)
    return str(p.with_name(f"{p.stem}_gamma{gamma:g}{p.suffix or '.csv'}"))


def cmd_sweep(args):
    base = _with_overrides(load_config(args.config), args)
    try:
        gammas = [float(g) for g in args.gamma_list.split(",") if g.strip()]
    except ValueError:
        raise ConfigError(f"--gamma-list must be comma-separated numbers, got {args.gamma_list!r}")
    if not gammas:
        raise ConfigError("--gamma-list is empty")
    configs = [replace(base, gamma=g, out_path=_gamma_path(args.out or base.out_path, g)).validate()
               for g in gammas]
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        results = list(pool.map(_sweep_one, configs))
    print("gamma,t_c,max_x_error,max_eta_error,max_theta_error")
    fmt = lambda v: "" if v is None else format(v, ".6g")
    for gamma, m in results:
        print(",".join([format(gamma, "g"), fmt(m.t_c), fmt(m.max_x_error_after_tc),
                        fmt(m.max_eta_error_after_tc), fmt(m.max_theta_error_after_tc)]))


def cmd_selftest(args):
    from .selftest import run_checks

    failed = 0
    for name, ok, detail in run_checks():
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return 1 if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="observe", description="PEBO + DREM fixed-time observer simulations")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--case", choices=("C1", "C2", "C3"))
        p.add_argument("--gamma", type=float)
        p.add_argument("--T", type=float, help="horizon in seconds")
        p.add_argument("--h", type=float, help="step size in seconds")
        p.add_argument("--out", help="CSV output path (default: stdout)")

    p = sub.add_parser("run", help="run a scenario from a JSON config")
    p.add_argument("--config", required=True)
    add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("paper", help="run the built-in two-state example")
    add_common(p)
    p.add_argument("--model", choices=sorted(BUILTIN_MODELS), default="paper")
    p.set_defaults(func=cmd_paper, case="C1")

    p = sub.add_parser("sweep", help="run one config for several adaptation gains")
    p.add_argument("--config", required=True)
    p.add_argument("--gamma-list", required=True)
    p.add_argument("--workers", type=int, default=None)
    add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("selftest", help="run the numerical invariant checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args) or EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numeric failure at t={exc.t}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
