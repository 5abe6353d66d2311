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

"""The simulate pipeline: sample paths and the expected utility of the optimal strategy."""

from dataclasses import replace
from typing import Dict, NamedTuple, Optional

import numpy as np
from flask import Flask

from .artifacts import ESTIMATE_JSON, PATHS_CSV, XI_POST_CSV, XI_PRE_CSV, load_solution
from ..schemas import RunConfig
from ..simulation.estimators import BlockRunner, Estimate, summarize, terminal_utilities
from ..simulation.paths import simulate_wealth
from ..strategy.value import ValueFunction, optimal_strategy
from ..util.logging import get_logger

SIMULATE_LOGGER = "simulate"


class SimulateResult(NamedTuple):
    estimate: Estimate
    exported_paths: int


def block_runner(app: Flask, run: RunConfig, scales: Dict[str, float]) -> Optional[BlockRunner]:
    """The configured way to run path blocks; None runs them in this process."""
    if app.config.get("SIMULATION_BACKEND", "local") != "celery":
        return None
    from ..tasks.simulation import celery_block_runner

    sim = run.require_sim()
    return celery_block_runner(
        app,
        run.model,
        sim.config,
        {
            "xiPost": str(run.outputs / XI_POST_CSV),
            "xiPre": str(run.outputs / XI_PRE_CSV),
        },
        run.grid,
        scales,
        sim.y0,
        sim.z0,
    )


def strategy_utilities(
    app: Flask, run: RunConfig, vf: ValueFunction, **scales: float
) -> np.ndarray:
    """Per-path terminal utilities of the (scaled) optimal strategy."""
    sim = run.require_sim()
    return terminal_utilities(
        run.model,
        sim.config,
        optimal_strategy(vf, **scales),
        sim.y0,
        sim.z0,
        block_runner(app, run, scales),
    )


def simulate_function(app: Flask, run: RunConfig) -> SimulateResult:
    logger = get_logger(app, SIMULATE_LOGGER)
    sim = run.require_sim()
    solution = load_solution(run.outputs, run.grid)
    vf = ValueFunction(run.model, solution.xi_post, solution.xi_pre)

    estimate = summarize(strategy_utilities(app, run, vf), sim.config)
    estimate.to_json(run.outputs / ESTIMATE_JSON)
    logger.info(
        f"Expected utility of the optimal strategy: {estimate.estimate:.6g} +- {estimate.stderr:.2g}."
    )

    exported = min(sim.export_paths, sim.config.n_paths)
    if exported:
        # antithetic runs simulate whole pairs
        n_paths = exported + (exported % 2 if sim.config.antithetic else 0)
        export_config = replace(sim.config, n_paths=n_paths)
        paths = simulate_wealth(run.model, export_config, optimal_strategy(vf), sim.y0, sim.z0)
        paths.to_csv(run.outputs / PATHS_CSV, max_paths=exported)
    return SimulateResult(estimate, exported)
