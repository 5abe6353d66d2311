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

"""Figure data written as CSV tables."""

from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, Iterable, Optional

import numpy as np
from flask import Flask

from .artifacts import load_solution
from ..errors import ModelError
from ..model.functions import m_star
from ..schemas import FIGURES, RunConfig
from ..solver.explicit import solve_pre_default
from ..strategy.sweeps import (
    BOND_SWEEP_COLUMNS,
    RETENTION_SWEEP_COLUMNS,
    STOCK_SWEEP_COLUMNS,
    bond_sweep,
    factor_nodes,
    retention_sweep,
    stock_sweep,
)
from ..strategy.value import PRE_DEFAULT, ValueFunction, strategy_table, value_table
from ..util import write_table
from ..util.logging import get_logger

FIGURES_LOGGER = "figures"

BOND_PROFILE_COLUMNS = ("inverse_delta", "zeta", "z", "m")

VALUE_WEALTH_GRID = np.linspace(0.0, 10.0, 21)
PROFILE_INVERSE_DELTAS = (2.0, 4.0, 8.0)
PROFILE_ZETAS = (0.2, 0.4, 0.8)
SWEEP_INVERSE_DELTAS = np.linspace(1.0, 10.0, 19)
SWEEP_ZETAS = (0.2, 0.4, 0.6, 0.8, 1.0)
SWEEP_THETAS = (0.1, 0.5, 1.0)
SWEEP_ALPHAS = (0.02, 0.05, 0.1, 0.2)
RETENTION_THETAS = (0.5, 1.0, 2.0, 8 / 3)
STOCK_FACTOR_NODES = factor_nodes(2.0, 10)

_SWEEP_TIME_POINTS = 101
_SURFACE_TIME_POINTS = 51


def _surface_times(vf: ValueFunction) -> np.ndarray:
    times = vf.xi_post.times
    picks = np.unique(np.linspace(0, len(times) - 1, min(_SURFACE_TIME_POINTS, len(times))).round())
    return times[picks.astype(int)]


def _interior(vf: ValueFunction) -> np.ndarray:
    return vf.xi_post.spec.z[1:-1]


def _value_function(run: RunConfig) -> ValueFunction:
    solution = load_solution(run.outputs, run.grid)
    return ValueFunction(run.model, solution.xi_post, solution.xi_pre)


def _fig1(app: Flask, run: RunConfig, vf: Optional[ValueFunction], path: Path):
    assert vf is not None
    value_table(vf, _surface_times(vf), VALUE_WEALTH_GRID, 0.0, path)


def _fig2(app: Flask, run: RunConfig, vf: Optional[ValueFunction], path: Path):
    assert vf is not None
    strategy_table(vf, _surface_times(vf), _interior(vf), PRE_DEFAULT, path)


def _fig3(app: Flask, run: RunConfig, vf: Optional[ValueFunction], path: Path):
    assert vf is not None
    params, zs = run.model, _interior(vf)
    kappa = run.kappa or app.config["DEFAULT_KAPPA"]
    settings = [(d, params.zeta) for d in PROFILE_INVERSE_DELTAS]
    settings += [(1 / params.delta, z) for z in PROFILE_ZETAS]
    rows = []
    for inverse_delta, zeta in settings:
        swept = replace(params, delta=1 / inverse_delta, zeta=zeta)
        xi_pre = solve_pre_default(swept, run.grid, vf.xi_post, kappa).xi
        m = np.asarray(m_star(swept, 0.0, xi_pre.interpolate(0.0, zs), vf.xi_post.interpolate(0.0, zs)))
        rows.append(
            np.column_stack((np.full_like(zs, inverse_delta), np.full_like(zs, zeta), zs, m))
        )
    write_table(path, BOND_PROFILE_COLUMNS, np.vstack(rows))


def _fig4(app: Flask, run: RunConfig, vf: Optional[ValueFunction], path: Path):
    assert vf is not None
    # long-run level of the factor, kept inside the lattice
    z = float(np.clip(run.model.ou_mean, -run.grid.d, run.grid.d))
    value_table(vf, _surface_times(vf), VALUE_WEALTH_GRID, z, path)


def _fig5(app: Flask, run: RunConfig, vf: Optional[ValueFunction], path: Path):
    table = bond_sweep(run.model, SWEEP_INVERSE_DELTAS, SWEEP_ZETAS, SWEEP_THETAS)
    write_table(path, BOND_SWEEP_COLUMNS, table)


def _fig6(app: Flask, run: RunConfig, vf: Optional[ValueFunction], path: Path):
    ts = np.linspace(0.0, run.model.T, _SWEEP_TIME_POINTS)
    table = retention_sweep(run.model, ts, SWEEP_ALPHAS, RETENTION_THETAS)
    write_table(path, RETENTION_SWEEP_COLUMNS, table)


def _fig7(app: Flask, run: RunConfig, vf: Optional[ValueFunction], path: Path):
    ts = np.linspace(0.0, run.model.T, _SWEEP_TIME_POINTS)
    table = stock_sweep(run.model, ts, SWEEP_ALPHAS, STOCK_FACTOR_NODES)
    write_table(path, STOCK_SWEEP_COLUMNS, table)


FigureWriter = Callable[[Flask, RunConfig, Optional[ValueFunction], Path], None]

FIGURE_WRITERS: Dict[str, FigureWriter] = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
}

NEEDS_SOLUTION = {"fig1", "fig2", "fig3", "fig4"}


def figures_function(
    app: Flask, run: RunConfig, which: Optional[Iterable[str]] = None
) -> Dict[str, Path]:
    """Write ``<outputs>/<figure>.csv`` for the requested figures (default: the configured ones)."""
    logger = get_logger(app, FIGURES_LOGGER)
    requested = list(which if which is not None else run.figures) or list(FIGURES)
    unknown = [f for f in requested if f not in FIGURE_WRITERS]
    if unknown:
        raise ModelError(f"Unknown figures {unknown}, expected some of {list(FIGURES)}.")

    vf = _value_function(run) if NEEDS_SOLUTION.intersection(requested) else None
    written = {}
    for name in requested:
        path = run.outputs / f"{name}.csv"
        FIGURE_WRITERS[name](app, run, vf, path)
        logger.info(f"Wrote {name} to '{path}'.")
        written[name] = path
    return written
