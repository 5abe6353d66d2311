# Copyright 2024 reinsurance-control contributors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""CLI commands for the solve, figures, simulate and verify pipelines."""

import json
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional, Tuple, cast

import click
from flask import Blueprint, Flask, current_app
from flask.cli import AppGroup, with_appcontext

from .figures import figures_function
from .simulate import simulate_function
from .solve import solve_function
from .verify import verify_function
from ..errors import MissingArtifactError, ModelError, SimulationError, SolverDivergenceError
from ..schemas import FIGURES, RunConfig, load_run_config

RUNS_CLI_BLP = Blueprint("runs_cli", __name__, cli_group=None)
RUNS_CLI = cast(AppGroup, RUNS_CLI_BLP.cli)  # expose as attribute for autodoc generation

CONFIG_OPTION = click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="The JSON run configuration.",
)


def load_run(app: Flask, config_path: Path) -> RunConfig:
    return load_run_config(
        config_path,
        default_stride=app.config["STORAGE_STRIDE"],
        default_block_size=app.config["SIMULATION_BLOCK_SIZE"],
    )


@contextmanager
def reported_errors() -> Iterator[None]:
    """Turn pipeline errors into a clean CLI failure with exit code 1."""
    try:
        yield
    except (ModelError, SolverDivergenceError, SimulationError, MissingArtifactError) as err:
        raise click.ClickException(f"{type(err).__name__}: {err}")


@RUNS_CLI.command("solve")
@CONFIG_OPTION
@with_appcontext
def solve(config_path: Path):
    """Solve the post- and pre-default problems and write the fields."""
    with reported_errors():
        run = load_run(current_app, config_path)
        result = solve_function(current_app, run)
    for name, check in result.checks.items():
        click.echo(f"{name}: {'ok' if check.passed else 'FAILED'} ({check.worst_violation:.3g})")
    click.echo(f"Solution written to '{run.outputs}'.")


def parse_figures(which: Tuple[str, ...]) -> Optional[List[str]]:
    """Figure names from repeated and/or comma separated ``--which`` values."""
    names = [name.strip() for value in which for name in value.split(",") if name.strip()]
    unknown = [name for name in names if name not in FIGURES]
    if unknown:
        raise click.BadParameter(
            f"unknown figures {unknown}, expected some of {list(FIGURES)}", param_hint="--which"
        )
    return names or None


@RUNS_CLI.command("figures")
@CONFIG_OPTION
@click.option(
    "--which",
    multiple=True,
    help="Figures to write, e.g. 'fig1,fig2' (repeatable, default: the figures of the configuration).",
)
@with_appcontext
def figures(config_path: Path, which: Tuple[str, ...]):
    """Write the figure data tables from a solved run."""
    requested = parse_figures(which)
    with reported_errors():
        run = load_run(current_app, config_path)
        written = figures_function(current_app, run, requested)
    for name, path in written.items():
        click.echo(f"{name}: {path}")


@RUNS_CLI.command("simulate")
@CONFIG_OPTION
@with_appcontext
def simulate(config_path: Path):
    """Estimate the expected utility of the optimal strategy by simulation."""
    with reported_errors():
        run = load_run(current_app, config_path)
        result = simulate_function(current_app, run)
    click.echo(json.dumps(result.estimate.to_dict(), sort_keys=True))
    click.echo(f"Exported {result.exported_paths} paths to '{run.outputs}'.")


@RUNS_CLI.command("verify")
@CONFIG_OPTION
@click.option("--quick", is_flag=True, default=False, help="Use the reduced lattice.")
@with_appcontext
def verify(config_path: Path, quick: bool):
    """Run the acceptance suite; exits with 1 if a gating check fails."""
    with reported_errors():
        run = load_run(current_app, config_path)
        report = verify_function(current_app, run, quick=quick)
    for name, check in report.checks.items():
        status = "ok" if check.passed else ("FAILED" if check.gating else "failed (report only)")
        click.echo(f"{name}: {status}")
    if not report.passed:
        raise click.ClickException("Acceptance suite failed.")
    click.echo("Acceptance suite passed.")


def register_cli_blueprint(app: Flask):
    """Method to register the runs CLI blueprint."""
    app.register_blueprint(RUNS_CLI_BLP)
    app.logger.info("Registered blueprint.")
