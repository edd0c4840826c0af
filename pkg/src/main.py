"""Command-line entry point: ``bec <command> [options]``."""

import argparse
import sys
from typing import Any, Dict, List, Optional

from src.core.branch_solver import critical_points, density_curves, phase_sweep
from src.core.config import settings
from src.core.finite_volume import fv_limit_scan
from src.core.job import job_log, map_ordered, set_log_level
from src.core.observables import grating_profile, phase_point
from src.core.report import (
    Artifact,
    critical_points_artifact,
    curves_artifact,
    fv_artifact,
    grating_artifact,
    phase_points_artifact,
    sweep_artifact,
)
from src.schemas.error import EXIT_OK, ConfigError, SolverErrorHandler
from src.schemas.run import CommandType, RunConfig
from src.utils import print_info, read_key_value_file

# Flags that map one-to-one onto RunConfig fields
FLAG_FIELDS = (
    "model",
    "beta",
    "lam",
    "omega",
    "g",
    "mass",
    "q",
    "mu",
    "mu_from",
    "mu_to",
    "steps",
    "n_samples",
    "phase",
    "delta_max",
    "L",
    "cutoff",
    "h",
    "damping",
    "max_iter",
    "tol",
    "output",
    "out",
)


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ConfigError(message)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="bec",
        description=f"{settings.PROJECT_NAME}: phase structure of BEC superradiance "
        "with momentum recoil.",
    )
    parser.add_argument("command", choices=[c.value for c in CommandType])
    parser.add_argument("--model", help="1 (Raman) or 2 (Rayleigh).")
    parser.add_argument("--beta", type=float)
    parser.add_argument("--lambda", dest="lam", type=float)
    parser.add_argument("--omega", type=float)
    parser.add_argument("--g", type=float)
    parser.add_argument("--mass", type=float)
    parser.add_argument("--q", type=float)
    parser.add_argument("--mu", type=float)
    parser.add_argument("--mu-from", dest="mu_from", type=float)
    parser.add_argument("--mu-to", dest="mu_to", type=float)
    parser.add_argument("--steps", type=int)
    parser.add_argument("--n-samples", dest="n_samples", type=int)
    parser.add_argument("--phase", type=float, help="Grating phase in radians.")
    parser.add_argument("--delta-max", dest="delta_max", type=float)
    parser.add_argument("--L", help="Box side, or a comma-separated list for fv.")
    parser.add_argument("--cutoff", type=int)
    parser.add_argument("--h", help="Source, or a comma-separated list for fv.")
    parser.add_argument("--damping", type=float)
    parser.add_argument("--max-iter", dest="max_iter", type=int)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--config", help="key=value file, overrides BEC_CONFIG.")
    parser.add_argument("--output", choices=["csv", "json"])
    parser.add_argument("--out", help="Output path, stdout when omitted.")
    parser.add_argument("--log-level", dest="log_level")
    return parser


def load_config(argv: Optional[List[str]] = None) -> RunConfig:
    """Merge the config file (if any) with command-line flags, flags winning."""
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_log_level(args.log_level)

    values: Dict[str, Any] = {}
    config_path = args.config or settings.CONFIG
    if config_path:
        try:
            values.update(read_key_value_file(config_path))
        except OSError as e:
            raise ConfigError(f"Cannot read config file {config_path}: {e}")
        except ValueError as e:
            raise ConfigError(str(e))
        # the file may spell the coupling as in the CLI
        if "lambda" in values:
            values["lam"] = values.pop("lambda")
        values.pop("command", None)

    for field in FLAG_FIELDS:
        value = getattr(args, field)
        if value is not None:
            values[field] = value
    return RunConfig(command=args.command, **values)


@job_log(job_step_name="run")
def run(config: RunConfig) -> int:
    """Execute one command and emit its artifact."""
    artifact = build_artifact(config)
    artifact.write(config.output, config.out)
    if config.out:
        print_info(f"{config.command.value} written to {config.out}")
    return EXIT_OK


def build_artifact(config: RunConfig) -> Artifact:
    params = config.params
    command = config.command
    if command == CommandType.point:
        return phase_points_artifact([phase_point(config.mu, params)])
    if command == CommandType.sweep:
        mus = config.mu_grid()
        branches = phase_sweep(params, mus)
        points = map_ordered(
            lambda pair: phase_point(pair[0], params, pair[1]), list(zip(mus, branches))
        )
        return sweep_artifact(points)
    if command == CommandType.boundaries:
        return critical_points_artifact(critical_points(params))
    if command == CommandType.grating:
        point = phase_point(config.mu, params)
        return grating_artifact(
            grating_profile(point, params, config.n_samples, config.phase)
        )
    if command == CommandType.fv:
        scan = fv_limit_scan(params, config.mu, config.L, config.h, config.lattice)
        return fv_artifact(scan)
    if command == CommandType.curves:
        step = config.delta_max / (config.steps - 1)
        deltas = [i * step for i in range(config.steps)]
        return curves_artifact(density_curves(params, deltas))
    raise ConfigError(f"Unknown command {command}.")


def main(argv: Optional[List[str]] = None) -> int:
    with SolverErrorHandler():
        return run(load_config(argv))


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
