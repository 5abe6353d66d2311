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

"""Monte Carlo estimators built on the path simulations."""

import json
from dataclasses import dataclass
from logging import getLogger
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from .config import SimConfig
from .paths import default_block, factor_step, terminal_wealth_block, time_grid
from .streams import FACTOR_STREAM, block_generator, normals
from ..model.functions import coef_h_factor_part, coef_h_time_part
from ..model.params import ModelParams
from ..strategy.value import StrategyPair

LOGGER = getLogger(__name__)

BlockRunner = Callable[[Sequence[int]], List[np.ndarray]]
"""Maps block ids to the per-path samples of those blocks (in the same order)."""

Coefficient = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Estimate:
    estimate: float
    stderr: float
    n_paths: int
    seed: int

    def to_dict(self) -> Dict[str, Union[float, int]]:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "nPaths": self.n_paths,
            "seed": self.seed,
        }

    def to_json(self, path: Union[str, Path]):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n")

    def within(self, reference: float, standard_errors: float, allowance: float = 0.0) -> bool:
        return abs(self.estimate - reference) <= standard_errors * self.stderr + allowance


def summarize(samples: np.ndarray, cfg: SimConfig) -> Estimate:
    """Mean and standard error; antithetic pairs are averaged before the error is taken."""
    samples = np.asarray(samples, dtype=float)
    units = samples.reshape(-1, 2).mean(axis=1) if cfg.antithetic else samples
    stderr = float(np.std(units, ddof=1) / np.sqrt(len(units))) if len(units) > 1 else 0.0
    return Estimate(float(np.mean(samples)), stderr, len(samples), cfg.seed)


def run_blocks(cfg: SimConfig, block_fn: Callable[[int], np.ndarray]) -> np.ndarray:
    """Evaluate the blocks in order in this process and join their samples."""
    return np.concatenate([block_fn(block) for block in range(cfg.n_blocks)])


def utility(params: ModelParams, wealth: np.ndarray) -> np.ndarray:
    return -np.exp(-params.alpha * np.asarray(wealth))


def terminal_utilities(
    params: ModelParams,
    cfg: SimConfig,
    strategy: StrategyPair,
    y0: float,
    z0: float,
    runner: Optional[BlockRunner] = None,
) -> np.ndarray:
    """-exp(-alpha*Y_T) for every path, in path order."""
    if runner is not None:
        return np.concatenate(runner(range(cfg.n_blocks)))
    return run_blocks(
        cfg,
        lambda block: utility(params, terminal_wealth_block(params, cfg, strategy, y0, z0, block)),
    )


def mc_expected_utility(
    params: ModelParams,
    cfg: SimConfig,
    strategy: StrategyPair,
    y0: float,
    z0: float,
    runner: Optional[BlockRunner] = None,
) -> Estimate:
    """Expected utility of terminal wealth when following ``strategy`` from (0, y0, z0)."""
    result = summarize(terminal_utilities(params, cfg, strategy, y0, z0, runner), cfg)
    LOGGER.info(f"Expected utility {result.estimate:.6g} +- {result.stderr:.2g} ({result.n_paths} paths).")
    return result


def paired_difference(challenger: np.ndarray, baseline: np.ndarray, cfg: SimConfig) -> Estimate:
    """Mean difference of two samples drawn with common random numbers."""
    return summarize(np.asarray(challenger) - np.asarray(baseline), cfg)


def feynman_kac_xi(
    params: ModelParams,
    cfg: SimConfig,
    t: float,
    z: float,
    coef: Optional[Coefficient] = None,
    absorb_at: Optional[float] = None,
) -> Estimate:
    """E[exp(-int_t^T h(s, Z_s) ds) | Z_t = z] along simulated factor paths.

    The time integral uses the trapezoidal rule on the Euler grid. With
    ``absorb_at`` the integral stops when |Z| first exceeds it, matching the
    boundary value 1 of the lattice problem on [-absorb_at, absorb_at].
    """
    times = time_grid(cfg, t, params.T)
    if coef is None:
        time_part = np.array([coef_h_time_part(params, s) for s in times])

        def h_at(k: int, zs: np.ndarray) -> np.ndarray:
            return time_part[k] + np.asarray(coef_h_factor_part(params, zs))

    else:

        def h_at(k: int, zs: np.ndarray) -> np.ndarray:
            return np.asarray(coef(times[k], zs)) * np.ones_like(zs)

    def block_fn(block: int) -> np.ndarray:
        rng = block_generator(cfg.seed, FACTOR_STREAM, block)
        zs = np.full(cfg.block_size, float(z))
        alive = np.ones(cfg.block_size, dtype=bool)
        integral = np.zeros(cfg.block_size)
        previous = h_at(0, zs)
        for k in range(len(times) - 1):
            dt = times[k + 1] - times[k]
            zs = factor_step(params, zs, dt, normals(rng, cfg.block_size, cfg.antithetic))
            current = h_at(k + 1, zs)
            integral += np.where(alive, 0.5 * (previous + current) * dt, 0.0)
            if absorb_at is not None:
                alive &= np.abs(zs) <= absorb_at
            previous = current
        return np.exp(-integral[: cfg.kept(block)])

    return summarize(run_blocks(cfg, block_fn), cfg)


def default_martingale_residual(params: ModelParams, cfg: SimConfig) -> Estimate:
    """Sample mean of zeta*(H_T - h^P * min(tau, T)), the compensated default jump."""
    samples = []
    for block in range(cfg.n_blocks):
        tau = default_block(params, cfg, block)[: cfg.kept(block)]
        defaulted = np.isfinite(tau)
        exposure = np.minimum(tau, params.T)
        samples.append(params.zeta * (defaulted - params.h_p * exposure))
    return summarize(np.concatenate(samples), cfg)
