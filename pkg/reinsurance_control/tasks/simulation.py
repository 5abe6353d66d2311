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

"""Celery tasks simulating blocks of Monte Carlo paths."""

from typing import Any, Dict, List, Sequence

import numpy as np
from celery import group
from celery.result import GroupResult
from celery.utils.log import get_task_logger
from flask import Flask

from ..celery import CELERY, FlaskTask
from ..errors import ModelError
from ..model.params import ModelParams
from ..schemas import GridSchema, ModelParamsSchema, SimConfigSchema, dump_grid, dump_model
from ..simulation.config import SimConfig
from ..simulation.estimators import BlockRunner, utility
from ..simulation.paths import terminal_wealth_block
from ..solver.grid import FieldGrid, GridSpec
from ..strategy.value import ValueFunction, optimal_strategy

_name = "reinsurance-control.tasks.simulation"

TASK_LOGGER = get_task_logger(_name)


def _dump_sim(cfg: SimConfig) -> Dict[str, Any]:
    return SimConfigSchema(only=("seed", "n_paths", "dt_sim", "antithetic", "block_size")).dump(cfg)


def _load_sim(data: Dict[str, Any]) -> SimConfig:
    loaded = SimConfigSchema().load(data)
    return SimConfig(
        seed=loaded["seed"],
        n_paths=loaded["n_paths"],
        dt_sim=loaded["dt_sim"],
        antithetic=loaded["antithetic"],
        block_size=loaded["block_size"],
    )


def _load_value_function(params: ModelParams, fields: Dict[str, Any]) -> ValueFunction:
    grid = GridSchema().load(fields["grid"])
    spec = GridSpec(T=params.T, **grid)
    return ValueFunction(
        params=params,
        xi_post=FieldGrid.from_csv(fields["xiPost"], spec, "xi"),
        xi_pre=FieldGrid.from_csv(fields["xiPre"], spec, "xi"),
    )


@CELERY.task(name=f"{_name}.simulate_utility_block", bind=True, ignore_result=False)
def simulate_utility_block(
    self: FlaskTask,
    model: Dict[str, Any],
    sim: Dict[str, Any],
    fields: Dict[str, Any],
    scales: Dict[str, float],
    y0: float,
    z0: float,
    block: int,
) -> List[float]:
    """Terminal utilities of one block of paths under the (scaled) optimal strategy."""
    params: ModelParams = ModelParamsSchema().load(model)
    cfg = _load_sim(sim)
    strategy = optimal_strategy(_load_value_function(params, fields), **scales)
    TASK_LOGGER.info(f"Simulating block {block} ({cfg.kept(block)} paths).")
    wealth = terminal_wealth_block(params, cfg, strategy, y0, z0, block)
    return utility(params, wealth).tolist()


def celery_block_runner(
    app: Flask,
    params: ModelParams,
    cfg: SimConfig,
    field_paths: Dict[str, str],
    spec: GridSpec,
    scales: Dict[str, float],
    y0: float,
    z0: float,
) -> BlockRunner:
    """Build a block runner that dispatches the blocks as a celery group.

    Only strategies derived from solved fields on disk can be sent to the
    workers, so the runner is bound to the field CSVs in ``field_paths``.
    """
    if params.sigma_kind == "custom" or params.g_kind == "custom":
        raise ModelError("Models with custom coefficient functions cannot be sent to workers.")
    model = dump_model(params)
    sim = _dump_sim(cfg)
    fields = {"grid": dump_grid(spec), **field_paths}
    timeout = app.config.get("SIMULATION_TIMEOUT", 60 * 60)

    def run(blocks: Sequence[int]) -> List[np.ndarray]:
        task_group = group(
            simulate_utility_block.s(model, sim, fields, scales, y0, z0, block)
            for block in blocks
        )
        group_result: GroupResult = task_group.apply_async()
        # results come back in block order independent of the worker count
        results = group_result.get(timeout=timeout)
        return [np.asarray(r, dtype=float) for r in results]

    return run
