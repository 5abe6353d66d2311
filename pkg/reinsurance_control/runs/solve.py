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

"""The solve pipeline: both finite difference problems and their bound checks."""

from pathlib import Path
from typing import Any, Dict, NamedTuple, Optional

from flask import Flask

from .artifacts import MANIFEST_JSON, RUNTIME_JSON, U_PRE_CSV, XI_POST_CSV, XI_PRE_CSV, write_json
from ..schemas import RunConfig, dump_grid, dump_model
from ..solver.checks import (
    CheckResult,
    closed_form_shift_check,
    reduction_check,
    sandwich_check,
)
from ..solver.explicit import PreDefaultSolution, check_cfl, solve_post_default, solve_pre_default
from ..solver.grid import FieldGrid
from ..util.logging import get_logger, timed

SOLVE_LOGGER = "solve"


class SolveResult(NamedTuple):
    xi_post: FieldGrid
    pre: PreDefaultSolution
    checks: Dict[str, CheckResult]
    manifest: Dict[str, Any]


def bound_checks(app: Flask, run: RunConfig, xi_post: FieldGrid, u_pre: FieldGrid) -> Dict[str, CheckResult]:
    config = app.config
    checks = {
        "sandwich": sandwich_check(run.model, xi_post, u_pre, config["SANDWICH_TOLERANCE"]),
        "closedFormShift": closed_form_shift_check(
            run.model, xi_post, u_pre, config["SANDWICH_TOLERANCE"]
        ),
    }
    if run.model.h_p == 0:
        checks["reduction"] = reduction_check(xi_post, u_pre, config["REDUCTION_TOLERANCE"])
    return checks


def solve_function(app: Flask, run: RunConfig, outputs: Optional[Path] = None) -> SolveResult:
    """Solve both problems for ``run`` and write the fields, the manifest and the timings."""
    logger = get_logger(app, SOLVE_LOGGER)
    config = app.config
    outputs = outputs or run.outputs
    params, spec = run.model, run.grid
    kappa = run.kappa or config["DEFAULT_KAPPA"]
    timings: Dict[str, float] = {}

    cfl = check_cfl(params, spec, config["CFL_WARN_RATIO"])
    with timed(logger, "post-default solve", timings):
        xi_post = solve_post_default(params, spec)
    with timed(logger, "pre-default solve", timings):
        pre = solve_pre_default(params, spec, xi_post, kappa, config["SATURATION_WARN_FRACTION"])

    checks = bound_checks(app, run, xi_post, pre.u)
    for name, check in checks.items():
        if check.gating and not check.passed:
            logger.warning(f"Check '{name}' failed: worst violation {check.worst_violation:.3g}.")

    checksums = {
        XI_POST_CSV: xi_post.to_csv(outputs / XI_POST_CSV),
        U_PRE_CSV: pre.u.to_csv(outputs / U_PRE_CSV),
        XI_PRE_CSV: pre.xi.to_csv(outputs / XI_PRE_CSV),
    }
    manifest = {
        "model": dump_model(params),
        "grid": dump_grid(spec),
        "kappa": kappa,
        "cfl": {
            "dt": cfl.dt,
            "dz": cfl.dz,
            "ratio": cfl.ratio,
            "selfWeightMargin": cfl.self_weight_margin,
            "cellPeclet": cfl.cell_peclet,
        },
        "saturatedFraction": pre.saturated_fraction,
        "checks": {name: check.to_dict() for name, check in checks.items()},
        "checksums": checksums,
    }
    write_json(outputs / MANIFEST_JSON, manifest)
    write_json(outputs / RUNTIME_JSON, {"timings": timings})
    logger.info(f"Wrote the solution to '{outputs}'.")
    return SolveResult(xi_post, pre, checks, manifest)
