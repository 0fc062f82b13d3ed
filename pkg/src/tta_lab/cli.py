"""Batch command-line front end.

Exit codes: 0 success, 1 input error, 2 numerical failure, 3 failed
verification.  Reports are deterministic JSON; ``simulate --format csv``
writes the removal-frequency sweep as CSV instead.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .core import decompose, estimate_gamma, uniform_weights, weighted_risk
from .errors import PredictionFileError, SingularGamma, TTALabError
from .io import dumps_report, load_predictions, outcomes_to_csv
from .optimizer import SolverOptions, condition_diagnostics, solve_closed_form, solve_projected
from .pruning import greedy_prune, surviving_indices
from .simulator import (
    SimulationConfig,
    fig1_experiment,
    verify_consistency,
    verify_prune_equivalence,
    verify_theorem1,
    verify_theorem2,
)

COMMANDS = ("estimate-gamma", "optimize", "prune", "decompose", "simulate", "verify")
DATA_COMMANDS = COMMANDS[:4]
DEFAULT_RHO_GRID = (0.0, 0.1, 0.2, 0.3, 0.33, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 1.0)
CONSISTENCY_GRID = (100, 400, 1600, 6400)
SEED_ENV = "TTA_LAB_SEED"

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    input_path: Path | None = None
    output_path: Path | None = None
    solver: SolverOptions = field(default_factory=SolverOptions)
    sim: SimulationConfig | None = None
    format: str | None = None
    min_keep: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.command in DATA_COMMANDS and self.input_path is None:
            raise ValueError(f"{self.command} needs --input")
        if self.command not in DATA_COMMANDS and self.sim is None:
            raise ValueError(f"{self.command} needs a simulation config")
        if self.format not in (None, "csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")

    def echo(self) -> dict:
        return {
            "command": self.command,
            "input": None if self.input_path is None else str(self.input_path),
            "format": self.format,
            "solver": {
                "ridge_lambda": self.solver.ridge_lambda,
                "conditioning_threshold": self.solver.conditioning_threshold,
                "projection": self.solver.projection,
            },
            "min_keep": self.min_keep if self.command == "prune" else None,
            "sim": None if self.sim is None else self.sim.to_dict(),
        }


def _seed(cli_seed: int | None) -> int:
    if cli_seed is not None:
        return cli_seed
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tta-lab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", type=Path)
    p.add_argument("--output", type=Path, help="report path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"),
                   help="input format for data commands, output format for simulate")
    p.add_argument("--ridge", type=float, default=SolverOptions.ridge_lambda)
    p.add_argument("--no-projection", action="store_true")
    p.add_argument("--min-keep", type=int, default=1)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--rho-grid", type=lambda s: tuple(float(x) for x in s.split(",") if x.strip()))
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--n-samples", type=int, default=100)
    p.add_argument("--n-trials", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    solver = SolverOptions(ridge_lambda=args.ridge, projection=not args.no_projection)
    sim = None
    if args.command not in DATA_COMMANDS:
        grid = args.rho_grid
        if args.command == "simulate" and grid is None:
            grid = DEFAULT_RHO_GRID
        sim = SimulationConfig(
            m=args.m,
            rho=args.rho,
            n_samples=args.n_samples,
            n_trials=args.n_trials,
            seed=_seed(args.seed),
            rho_grid=grid,
        )
    return RunConfig(
        command=args.command,
        input_path=args.input,
        output_path=args.output,
        solver=solver,
        sim=sim,
        format=args.format,
        min_keep=args.min_keep,
    )


def _header(config: RunConfig) -> dict:
    return {
        "tool": "tta-lab",
        "version": __version__,
        "command": config.command,
        "config": config.echo(),
        "seed": None if config.sim is None else config.sim.seed,
    }


def _optimize(data, config: RunConfig) -> dict:
    gamma = estimate_gamma(data)
    raw = solve_closed_form(gamma, config.solver)
    projected = solve_projected(gamma, config.solver)
    selected = projected if config.solver.projection else raw
    uniform = uniform_weights(gamma.size)
    return {
        "augmentation_names": list(data.augmentation_names),
        "gamma": gamma.entries,
        "sample_count": gamma.sample_count,
        "condition_estimate": condition_diagnostics(gamma),
        "raw": raw.to_dict(),
        "projected": projected.to_dict(),
        "selected": "closed_form_projected" if config.solver.projection else "closed_form_raw",
        "weights": selected.weights.weights,
        "risk": {
            "uniform": weighted_risk(gamma, uniform),
            "raw": weighted_risk(gamma, raw.weights),
            "projected": weighted_risk(gamma, projected.weights),
        },
    }


def _data_report(data, config: RunConfig) -> dict:
    cmd = config.command
    if cmd == "estimate-gamma":
        gamma = estimate_gamma(data)
        return {
            "augmentation_names": list(data.augmentation_names),
            "gamma": gamma.entries,
            "sample_count": gamma.sample_count,
            "condition_estimate": condition_diagnostics(gamma),
        }
    if cmd == "optimize":
        return _optimize(data, config)
    if cmd == "prune":
        gamma = estimate_gamma(data)
        decisions = greedy_prune(gamma, config.min_keep)
        keep = surviving_indices(gamma.size, decisions)
        return {
            "augmentation_names": list(data.augmentation_names),
            "removed": [dict(d.to_dict(), name=data.augmentation_names[d.index_k]) for d in decisions],
            "kept": [data.augmentation_names[i] for i in keep],
            "risk_initial": weighted_risk(gamma, uniform_weights(gamma.size)),
            "risk_final": weighted_risk(gamma.submatrix(keep), uniform_weights(len(keep))),
        }
    return decompose(data, uniform_weights(data.n_augmentations)).to_dict()


def _verify(sim: SimulationConfig) -> tuple[dict, bool]:
    suites = {
        "theorem1": verify_theorem1(sim),
        "theorem2": verify_theorem2(replace(sim, rho=0.0)),
        "consistency": verify_consistency(sim, CONSISTENCY_GRID),
    }
    if sim.m >= 2:
        suites["prune_equivalence"] = verify_prune_equivalence(sim)
    # only the trend summary is needed in the report, not every deviation
    consistency = suites["consistency"].to_dict()
    consistency.pop("deviations")
    report = {name: s.to_dict() for name, s in suites.items()}
    report["consistency"] = consistency
    passed = all(s.passed for s in suites.values())
    report["passed"] = passed
    return report, passed


def run(config: RunConfig) -> int:
    """Execute one command, write its report, and return the exit status."""
    fmt_out = "json"
    try:
        if config.command in DATA_COMMANDS:
            data = load_predictions(config.input_path, config.format)
            body = _data_report(data, config)
            status = EXIT_OK
        elif config.command == "simulate":
            outcomes = fig1_experiment(config.sim)
            if config.format == "csv":
                fmt_out = "csv"
                text = outcomes_to_csv(outcomes, config.sim.seed)
            body = {"outcomes": [
                {"rho": o.rho, "probability_holds": o.probability_holds, "trials": o.trials}
                for o in outcomes
            ]}
            status = EXIT_OK
        else:
            body, passed = _verify(config.sim)
            status = EXIT_OK if passed else EXIT_VERIFY
    except (PredictionFileError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"tta-lab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SingularGamma as exc:
        print(f"tta-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (TTALabError, ValueError) as exc:
        print(f"tta-lab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if fmt_out == "json":
        text = dumps_report({**_header(config), "report": body})
    if config.output_path is None:
        sys.stdout.write(text)
    else:
        config.output_path.write_text(text, encoding="utf-8")
    return status


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; 2 is reserved for numerical failure here
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        config = config_from_args(args)
    except (TTALabError, ValueError) as exc:
        print(f"tta-lab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
