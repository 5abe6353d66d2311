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

"""The verify pipeline: the full acceptance suite as one machine readable report."""

from dataclasses import replace
from logging import Logger
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from flask import Flask
from scipy.integrate import quad

from .artifacts import MANIFEST_JSON, RUNTIME_JSON, VERIFY_JSON, checksum_mismatches, read_json, write_json
from .simulate import strategy_utilities
from .solve import solve_function
from ..errors import CFLViolationError
from ..model.functions import (
    coef_h_factor_part,
    coef_h_time_part,
    m_star_bounds,
    m_star_from_logs,
)
from ..schemas import RunConfig
from ..simulation.estimators import feynman_kac_xi, paired_difference, summarize
from ..simulation.paths import terminal_wealth_block
from ..solver.checks import CheckResult, reduction_check
from ..solver.explicit import (
    check_cfl,
    grid_convergence,
    refined_spec,
    solve_post_default,
    solve_pre_default,
)
from ..solver.grid import GridSpec
from ..strategy.monotonicity import check_monotonicity_suite
from ..strategy.value import PRE_DEFAULT, ValueFunction, optimal_strategy, value
from ..util.logging import get_logger, timed

VERIFY_LOGGER = "verify"

QUICK_OUTPUTS = "quick"

QUADRATURE_PROBE_FACTORS = (-1.0, -0.5, 0.0, 0.5, 1.0)
QUADRATURE_TOLERANCE = 1e-3

PERTURBATIONS: Dict[str, Dict[str, float]] = {
    "stockTimes1.5": {"l_scale": 1.5},
    "noBond": {"m_scale": 0.0},
    "halfRetention": {"a_scale": 0.5},
}


class VerifyReport(NamedTuple):
    passed: bool
    checks: Dict[str, CheckResult]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": {name: check.to_dict() for name, check in self.checks.items()},
        }


def quick_run(app: Flask, run: RunConfig) -> RunConfig:
    """The run on the reduced QUICK_GRID lattice, writing to a separate directory."""
    quick = app.config["QUICK_GRID"]
    grid = GridSpec(
        d=run.grid.d,
        n_space=int(quick["N"]),
        n_time=int(quick["Mt"]),
        T=run.grid.T,
        stride=min(run.grid.stride, int(quick["Mt"]) - 1),
    )
    return replace(run, grid=grid, outputs=run.outputs / QUICK_OUTPUTS)


def _cfl_check(run: RunConfig, warn_ratio: float) -> CheckResult:
    try:
        cfl = check_cfl(run.model, run.grid, warn_ratio)
    except CFLViolationError as err:
        return CheckResult("cfl", False, err.ratio, 1.0, details={"message": str(err)})
    return CheckResult(
        "cfl",
        True,
        0.0,
        1.0,
        details={"dt": cfl.dt, "dz": cfl.dz, "ratio": cfl.ratio, "selfWeightMargin": cfl.self_weight_margin},
    )


def _nearest_columns(times: np.ndarray, targets: List[float]) -> List[int]:
    return sorted({int(np.argmin(np.abs(times - t))) for t in targets})


def _quadrature_check(run: RunConfig) -> CheckResult:
    """Without diffusion and drift every interior node solves an ODE with a quadrature solution."""
    params = replace(run.model, beta=0.0, g_kind="zero", relaxed=True)
    xi = solve_post_default(params, run.grid)
    spec = run.grid
    rows = sorted(
        {int(round((z + spec.d) / spec.dz)) for z in QUADRATURE_PROBE_FACTORS if abs(z) < spec.d}
    )
    rows = [i for i in rows if 0 < i < spec.n_space - 1]
    worst = 0.0
    for k in _nearest_columns(xi.times, [0.0, params.T / 2]):
        t = float(xi.times[k])
        time_integral, _ = quad(
            lambda s: coef_h_time_part(params, s), t, params.T, epsabs=1e-12, epsrel=1e-10
        )
        for i in rows:
            z = float(spec.z[i])
            exact = np.exp(-(time_integral + float(coef_h_factor_part(params, z)) * (params.T - t)))
            worst = max(worst, abs(xi.values[i, k] - exact) / exact)
    return CheckResult("quadratureOracle", worst <= QUADRATURE_TOLERANCE, worst, QUADRATURE_TOLERANCE)


def _grid_convergence_check(run: RunConfig, tolerance: float) -> CheckResult:
    change = grid_convergence(run.model, run.grid)
    refined = refined_spec(run.grid)
    return CheckResult(
        "gridConvergence",
        change <= tolerance,
        change,
        tolerance,
        details={"refinedN": refined.n_space, "refinedMt": refined.n_time},
    )


def _bond_bounds_check(
    vf: ValueFunction, tolerance: float, field_tolerance: float
) -> CheckResult:
    """m* on every stored node (interior rows) inside its analytic bounds.

    The log-field tolerance is carried into m units on top of ``tolerance``.
    """
    params = vf.params
    xi_pre, xi_post = vf.xi_pre.values[1:-1], vf.xi_post.values[1:-1]
    scale = params.discount(vf.xi_pre.times) / (params.alpha * params.zeta)
    m = m_star_from_logs(params, vf.xi_pre.times[None, :], np.log(xi_pre), np.log(xi_post))
    lower, upper = m_star_bounds(params, vf.xi_pre.times)
    slack = field_tolerance * scale[None, :]
    worst = max(
        float(np.max(np.asarray(lower)[None, :] - m - slack)),
        float(np.max(m - np.asarray(upper)[None, :] - slack)),
        0.0,
    )
    return CheckResult("bondBounds", worst <= tolerance, worst, tolerance)


def _feynman_kac_check(app: Flask, run: RunConfig, vf: ValueFunction) -> CheckResult:
    sim = run.require_sim()
    estimate = feynman_kac_xi(run.model, sim.config, 0.0, 0.0, absorb_at=run.grid.d)
    reference = vf.xi_post.interpolate(0.0, 0.0)
    allowed = (
        app.config["MC_STANDARD_ERRORS"] * estimate.stderr
        + app.config["MC_DISCRETIZATION_ALLOWANCE"]
    )
    deviation = abs(estimate.estimate - reference)
    return CheckResult(
        "feynmanKac",
        deviation <= allowed,
        deviation,
        allowed,
        details={"estimate": estimate.to_dict(), "reference": reference},
    )


def _verification_checks(
    app: Flask, run: RunConfig, vf: ValueFunction
) -> Tuple[CheckResult, CheckResult]:
    sim = run.require_sim()
    config = app.config
    errors = config["MC_STANDARD_ERRORS"]
    optimal = strategy_utilities(app, run, vf)
    estimate = summarize(optimal, sim.config)
    reference = value(vf, 0.0, sim.y0, sim.z0, PRE_DEFAULT)
    allowed = errors * estimate.stderr
    deviation = abs(estimate.estimate - reference)
    verification = CheckResult(
        "expectedUtility",
        deviation <= allowed,
        deviation,
        allowed,
        details={"estimate": estimate.to_dict(), "reference": reference},
    )

    details: Dict[str, Any] = {}
    worst = -np.inf
    passed = True
    for name, scales in PERTURBATIONS.items():
        difference = paired_difference(strategy_utilities(app, run, vf, **scales), optimal, sim.config)
        excess = difference.estimate - errors * difference.stderr
        passed &= excess <= 0
        worst = max(worst, excess)
        details[name] = difference.to_dict()
    tournament = CheckResult(
        "tournament", bool(passed), max(float(worst), 0.0), 0.0, details=details
    )
    return verification, tournament


def _determinism_check(
    run: RunConfig, previous: Optional[Dict[str, str]], current: Dict[str, str], vf: ValueFunction
) -> CheckResult:
    sim = run.require_sim()
    strategy = optimal_strategy(vf)
    first = terminal_wealth_block(run.model, sim.config, strategy, sim.y0, sim.z0, 0)
    second = terminal_wealth_block(run.model, sim.config, strategy, sim.y0, sim.z0, 0)
    paths_equal = bool(np.array_equal(first, second))
    artifacts_equal = previous is None or previous == current
    return CheckResult(
        "determinism",
        paths_equal and artifacts_equal,
        0.0 if paths_equal and artifacts_equal else 1.0,
        0.0,
        details={"comparedWithPreviousRun": previous is not None, "pathsReproduced": paths_equal},
    )


def verify_function(app: Flask, run: RunConfig, quick: bool = False) -> VerifyReport:
    """Run the acceptance suite and write ``verify.json``; the report passes if all gating checks pass."""
    logger = get_logger(app, VERIFY_LOGGER)
    config = app.config
    if quick:
        run = quick_run(app, run)
    run.require_sim()
    outputs = run.outputs
    timings: Dict[str, float] = {}
    checks: Dict[str, CheckResult] = {}

    previous: Optional[Dict[str, str]] = None
    if (outputs / MANIFEST_JSON).is_file():
        previous = read_json(outputs / MANIFEST_JSON).get("checksums")
        mismatches = checksum_mismatches(outputs)
        checks["artifacts"] = CheckResult(
            "artifacts", not mismatches, float(len(mismatches)), 0.0, details={"mismatches": mismatches}
        )

    checks["cfl"] = _cfl_check(run, config["CFL_WARN_RATIO"])
    if not checks["cfl"].passed:
        return _finish(outputs, checks, timings, logger)

    with timed(logger, "solve", timings):
        solved = solve_function(app, run, outputs)
    vf = ValueFunction(run.model, solved.xi_post, solved.pre.xi)
    kappa = run.kappa or config["DEFAULT_KAPPA"]

    with timed(logger, "quadrature oracle", timings):
        checks["quadratureOracle"] = _quadrature_check(run)
    with timed(logger, "feynman-kac oracle", timings):
        checks["feynmanKac"] = _feynman_kac_check(app, run, vf)
    with timed(logger, "grid convergence", timings):
        checks["gridConvergence"] = _grid_convergence_check(
            run, config["GRID_CONVERGENCE_TOLERANCE"]
        )
    checks["sandwich"] = solved.checks["sandwich"]
    checks["closedFormShift"] = solved.checks["closedFormShift"]

    with timed(logger, "reduction", timings):
        no_default = replace(run.model, h_p=0.0)
        u_no_default = solve_pre_default(no_default, run.grid, solved.xi_post, kappa).u
        checks["reduction"] = reduction_check(
            solved.xi_post, u_no_default, config["REDUCTION_TOLERANCE"]
        )

    checks["bondBounds"] = _bond_bounds_check(
        vf, config["MONOTONICITY_TOLERANCE"], config["SANDWICH_TOLERANCE"]
    )

    with timed(logger, "expected utility", timings):
        checks["expectedUtility"], checks["tournament"] = _verification_checks(app, run, vf)

    with timed(logger, "monotonicity", timings):
        suite = check_monotonicity_suite(
            vf,
            config["MONOTONICITY_TOLERANCE"],
            config["SANDWICH_TOLERANCE"],
            kappa,
        )
    checks["monotonicity"] = CheckResult(
        "monotonicity",
        suite.passed,
        max((c.worst_violation for c in suite.claims if c.gating), default=0.0),
        config["MONOTONICITY_TOLERANCE"],
        details={"claims": [c.to_dict() for c in suite.claims]},
    )

    with timed(logger, "kappa doubling", timings):
        doubled = solve_pre_default(run.model, run.grid, solved.xi_post, 2 * kappa).u
        change = float(np.max(np.abs(doubled.values - solved.pre.u.values)))
    checks["kappa"] = CheckResult(
        "kappa", change <= config["KAPPA_TOLERANCE"], change, config["KAPPA_TOLERANCE"]
    )

    checks["determinism"] = _determinism_check(run, previous, solved.manifest["checksums"], vf)
    return _finish(outputs, checks, timings, logger)


def _finish(
    outputs: Path, checks: Dict[str, CheckResult], timings: Dict[str, float], logger: Logger
) -> VerifyReport:
    passed = all(check.passed for check in checks.values() if check.gating)
    report = VerifyReport(passed, checks)
    write_json(outputs / VERIFY_JSON, report.to_dict())
    write_json(outputs / RUNTIME_JSON, {"timings": timings})
    for name, check in checks.items():
        if check.gating and not check.passed:
            logger.warning(f"Acceptance check '{name}' failed ({check.worst_violation:.3g}).")
    logger.info(f"Acceptance suite {'passed' if passed else 'failed'}.")
    return report
