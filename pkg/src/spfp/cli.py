"""Command-line runner: ``spfp --test gaussian --out runs/t1``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .experiment import ConfigError, RunConfig, read_config_file, run_experiment
from .integrators import NumericalFailure
from .quadrature import QuadratureError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

SWEEP_BETAS = (1.0, 2.0, 3.0)
SWEEP_EPS = (0.1, 0.01, 0.001)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spfp", description="Structure-preserving Fokker-Planck solver with tanh drift.")
    p.add_argument("--config", help="flat key = value file; command-line flags take precedence")
    p.add_argument("--test", choices=("gaussian", "generalized_gaussian"))
    p.add_argument("--beta", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--dt", help="'diffusive' (dx^2/L), 'cfl', or a number")
    p.add_argument("--integrator", choices=("rk4", "ssp_rk3", "implicit_euler"))
    p.add_argument("--weights", choices=("sp2", "sp4", "sp6", "spG", "exact"))
    p.add_argument("--initial", help="'bimodal', 'equilibrium', or a two-column file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--record-every", dest="record_every", type=int)
    p.add_argument("--p", type=float, help="exponent of the d_p functional (default 0.75)")
    p.add_argument("--strict-cfl", dest="strict_cfl", action="store_true", default=None,
                   help="cap dt at the positivity bound")
    p.add_argument("--plots", action="store_true", default=None, help="write SVG plots")
    p.add_argument("--sweep-beta", action="store_true",
                   help=f"run generalized Gaussian tests for beta in {SWEEP_BETAS}")
    p.add_argument("--sweep-eps", action="store_true", help=f"repeat the run for eps in {SWEEP_EPS}")
    p.add_argument("--jobs", type=int, default=1, help="parallel processes for sweeps")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    field_names = {f.name for f in dataclasses.fields(RunConfig)}
    for name in field_names:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def sweep_configs(base: RunConfig, beta: bool, eps: bool) -> list[RunConfig]:
    configs = [base]
    if beta:
        configs = [dataclasses.replace(c, test="generalized_gaussian", beta=b) for c in configs
                   for b in SWEEP_BETAS]
    if eps:
        configs = [dataclasses.replace(c, eps=e) for c in configs for e in SWEEP_EPS]
    if len(configs) > 1 and base.out:
        for i, c in enumerate(configs):
            tag = []
            if beta:
                tag.append(f"beta{c.beta:g}")
            if eps:
                tag.append(f"eps{c.eps:g}")
            configs[i] = dataclasses.replace(c, out=str(Path(base.out) / "_".join(tag)))
    return configs


def _run_one(config: RunConfig) -> str:
    res = run_experiment(config)
    last = res.records[-1]
    return (f"{config.test} beta={config.beta:g} eps={config.eps:g}: T={last.t:g} "
            f"rel_l1={last.rel_l1:.3e} entropy={last.entropy:.3e} dt={res.dt:.4g}"
            + (f" -> {config.out}" if config.out else ""))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        base = resolve_config(args)
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        configs = sweep_configs(base, args.sweep_beta, args.sweep_eps)
        if args.jobs > 1 and len(configs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                lines = list(pool.map(_run_one, configs))
        else:
            lines = [_run_one(c) for c in configs]
    except ConfigError as exc:
        print(f"spfp: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, QuadratureError, FloatingPointError) as exc:
        print(f"spfp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"spfp: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for line in lines:
        print(line)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
