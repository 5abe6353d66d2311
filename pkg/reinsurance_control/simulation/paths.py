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

"""Euler-Maruyama simulation of the factor, default, claims and wealth processes."""

from dataclasses import dataclass
from pathlib import Path
from typing import List, NamedTuple, Optional, Union

import numpy as np

from .config import SimConfig
from .streams import (
    CLAIMS_STREAM,
    DEFAULT_STREAM,
    FACTOR_STREAM,
    WEALTH_STREAM,
    block_generator,
    normals,
)
from ..errors import SimulationError
from ..model.functions import effective_bond_drift, premium_rate
from ..model.params import ModelParams
from ..strategy.value import StrategyPair
from ..util import write_table

PATH_COLUMNS = ("path", "t", "Z", "Y", "H")

DefaultOverride = Union[None, float, np.ndarray]


class FactorPaths(NamedTuple):
    times: np.ndarray
    values: np.ndarray
    """Shape (n_paths, len(times))."""


def time_grid(cfg: SimConfig, t0: float, T: float) -> np.ndarray:
    steps = cfg.steps(T - t0)
    return t0 + np.arange(steps + 1) * ((T - t0) / steps)


def _concat(blocks: List[np.ndarray], n_paths: int) -> np.ndarray:
    return np.concatenate(blocks, axis=0)[:n_paths]


def factor_step(params: ModelParams, z: np.ndarray, dt: float, draws: np.ndarray) -> np.ndarray:
    return z + params.g(z) * dt + params.beta * np.sqrt(dt) * draws


def simulate_factor(
    params: ModelParams,
    cfg: SimConfig,
    z0: float,
    t0: float = 0.0,
    terminal_only: bool = False,
) -> FactorPaths:
    """Factor paths on [t0, T] started in z0."""
    times = time_grid(cfg, t0, params.T)
    blocks = []
    for block in range(cfg.n_blocks):
        rng = block_generator(cfg.seed, FACTOR_STREAM, block)
        z = np.full(cfg.block_size, float(z0))
        history = [z] if not terminal_only else []
        for k in range(len(times) - 1):
            z = factor_step(params, z, times[k + 1] - times[k], normals(rng, cfg.block_size, cfg.antithetic))
            if not terminal_only:
                history.append(z)
        blocks.append(np.column_stack(history) if history else z[:, None])
    values = _concat(blocks, cfg.n_paths)
    return FactorPaths(times if not terminal_only else times[-1:], values)


def default_block(params: ModelParams, cfg: SimConfig, block: int) -> np.ndarray:
    if params.h_p == 0:
        return np.full(cfg.block_size, np.inf)
    rng = block_generator(cfg.seed, DEFAULT_STREAM, block)
    tau = rng.exponential(1 / params.h_p, cfg.block_size)
    return np.where(tau <= params.T, tau, np.inf)


def simulate_default(params: ModelParams, cfg: SimConfig) -> np.ndarray:
    """Default times under the real-world intensity; inf means no default up to T."""
    return _concat([default_block(params, cfg, b) for b in range(cfg.n_blocks)], cfg.n_paths)


class ClaimSample(NamedTuple):
    path: np.ndarray
    time: np.ndarray
    size: np.ndarray


def _claims_in_step(
    rng: np.random.Generator, params: ModelParams, n: int, t: float, dt: float
) -> ClaimSample:
    counts = rng.poisson(params.lambda_claims * dt, n)
    total = int(counts.sum())
    if total == 0:
        empty = np.empty(0)
        return ClaimSample(np.empty(0, dtype=int), empty, empty)
    arrival = t + rng.random(total) * dt
    size = rng.exponential(params.mu_inf, total)
    return ClaimSample(np.repeat(np.arange(n), counts), arrival, size)


def simulate_claims(params: ModelParams, cfg: SimConfig) -> ClaimSample:
    """Claim arrivals and sizes on [0, T] for all paths, sorted by path then time."""
    times = time_grid(cfg, 0.0, params.T)
    parts = []
    for block in range(cfg.n_blocks):
        rng = block_generator(cfg.seed, CLAIMS_STREAM, block)
        kept = cfg.kept(block)
        for k in range(len(times) - 1):
            sample = _claims_in_step(rng, params, cfg.block_size, times[k], times[k + 1] - times[k])
            mask = sample.path < kept
            parts.append(
                ClaimSample(sample.path[mask] + block * cfg.block_size, sample.time[mask], sample.size[mask])
            )
    path = np.concatenate([p.path for p in parts]) if parts else np.empty(0, dtype=int)
    time = np.concatenate([p.time for p in parts]) if parts else np.empty(0)
    size = np.concatenate([p.size for p in parts]) if parts else np.empty(0)
    order = np.lexsort((time, path))
    return ClaimSample(path[order], time[order], size[order])


@dataclass(frozen=True)
class SimPath:
    """One recorded trajectory; ``H[k]`` is the default indicator at ``times[k]``."""

    times: np.ndarray
    Z: np.ndarray
    Y: np.ndarray
    H: np.ndarray
    claim_times: np.ndarray
    claim_sizes: np.ndarray
    retained_claims: np.ndarray
    default_time: float


@dataclass(frozen=True)
class WealthPaths:
    """Recorded paths of a wealth simulation (arrays have one row per path)."""

    times: np.ndarray
    Z: np.ndarray
    Y: np.ndarray
    H: np.ndarray
    default_times: np.ndarray
    claims: ClaimSample
    retained_claims: np.ndarray

    def __len__(self) -> int:
        return self.Y.shape[0]

    def path(self, i: int) -> SimPath:
        mask = self.claims.path == i
        return SimPath(
            times=self.times,
            Z=self.Z[i],
            Y=self.Y[i],
            H=self.H[i],
            claim_times=self.claims.time[mask],
            claim_sizes=self.claims.size[mask],
            retained_claims=self.retained_claims[mask],
            default_time=float(self.default_times[i]),
        )

    def to_csv(self, path: Union[str, Path], max_paths: Optional[int] = None) -> str:
        """Write "path,t,Z,Y,H" rows (path outer, time inner) and return the sha256 checksum."""
        n = len(self) if max_paths is None else min(max_paths, len(self))
        steps = len(self.times)
        rows = np.column_stack(
            (
                np.repeat(np.arange(n), steps),
                np.tile(self.times, n),
                self.Z[:n].ravel(),
                self.Y[:n].ravel(),
                self.H[:n].ravel(),
            )
        )
        return write_table(path, PATH_COLUMNS, rows)


class _BlockResult(NamedTuple):
    terminal_wealth: np.ndarray
    Z: Optional[np.ndarray]
    Y: Optional[np.ndarray]
    H: Optional[np.ndarray]
    default_times: np.ndarray
    claims: Optional[ClaimSample]
    retained_claims: Optional[np.ndarray]


def _wealth_block(
    params: ModelParams,
    cfg: SimConfig,
    strategy: StrategyPair,
    y0: float,
    z0: float,
    block: int,
    record: bool,
    default_override: DefaultOverride,
) -> _BlockResult:
    n = cfg.block_size
    times = time_grid(cfg, 0.0, params.T)
    factor_rng = block_generator(cfg.seed, FACTOR_STREAM, block)
    claims_rng = block_generator(cfg.seed, CLAIMS_STREAM, block)
    wealth_rng = block_generator(cfg.seed, WEALTH_STREAM, block)

    if default_override is None:
        tau = default_block(params, cfg, block)
    else:
        tau = np.broadcast_to(np.asarray(default_override, dtype=float), (n,)).copy()

    bond_rate = effective_bond_drift(params)
    z = np.full(n, float(z0))
    y = np.full(n, float(y0))
    history = {"Z": [z], "Y": [y], "H": [tau <= times[0]]} if record else None
    claim_parts: List[ClaimSample] = []
    retained_parts: List[np.ndarray] = []

    for k in range(len(times) - 1):
        t, dt = times[k], times[k + 1] - times[k]
        # controls are evaluated at the left end of the step (left limits)
        defaulted = tau <= t
        pre, post = strategy.pre, strategy.post
        l = np.where(defaulted, post.l(t, z), pre.l(t, z))
        m = np.where(defaulted, 0.0, pre.m(t, z))
        a = np.where(defaulted, post.a(t), pre.a(t))

        wealth_draws = normals(wealth_rng, n, cfg.antithetic)
        factor_draws = normals(factor_rng, n, cfg.antithetic)

        drift = params.r * y + (params.mu(z) - params.r) * l + np.asarray(premium_rate(params, a))
        alive = np.clip(tau - t, 0.0, dt)
        defaults_now = ~defaulted & (tau <= t + dt)
        y_next = (
            y
            + drift * dt
            + l * params.sigma(z) * np.sqrt(dt) * wealth_draws
            + m * bond_rate * alive
            - np.where(defaults_now, m * params.zeta, 0.0)
        )

        claims = _claims_in_step(claims_rng, params, n, t, dt)
        if len(claims.path):
            after_default = tau[claims.path] <= claims.time
            retention = np.where(
                after_default,
                np.broadcast_to(post.a(claims.time), claims.time.shape),
                np.broadcast_to(pre.a(claims.time), claims.time.shape),
            )
            retained = np.minimum(claims.size, retention)
            # claims paid at the arrival time miss the interest until the step end
            paid = retained * np.exp(params.r * (t + dt - claims.time))
            y_next = y_next - np.bincount(claims.path, paid, minlength=n)
            if record:
                claim_parts.append(claims)
                retained_parts.append(retained)

        z = factor_step(params, z, dt, factor_draws)
        y = y_next
        bad = ~np.isfinite(y[: cfg.kept(block)])
        if np.any(bad):
            i = int(np.argmax(bad))
            raise SimulationError(
                f"Wealth became nonfinite on path {block * n + i} at t={t + dt:.6g}.",
                path=block * n + i,
                time=t + dt,
            )
        if history is not None:
            history["Z"].append(z)
            history["Y"].append(y)
            history["H"].append(tau <= t + dt)

    if history is None:
        return _BlockResult(y, None, None, None, tau, None, None)
    if claim_parts:
        claims = ClaimSample(
            np.concatenate([c.path for c in claim_parts]),
            np.concatenate([c.time for c in claim_parts]),
            np.concatenate([c.size for c in claim_parts]),
        )
        retained = np.concatenate(retained_parts)
    else:
        claims = ClaimSample(np.empty(0, dtype=int), np.empty(0), np.empty(0))
        retained = np.empty(0)
    return _BlockResult(
        y,
        np.column_stack(history["Z"]),
        np.column_stack(history["Y"]),
        np.column_stack(history["H"]).astype(float),
        tau,
        claims,
        retained,
    )


def terminal_wealth_block(
    params: ModelParams,
    cfg: SimConfig,
    strategy: StrategyPair,
    y0: float,
    z0: float,
    block: int,
    default_override: DefaultOverride = None,
) -> np.ndarray:
    """Terminal wealth of the kept paths of one block."""
    cfg.check_horizon(params.T)
    result = _wealth_block(params, cfg, strategy, y0, z0, block, False, default_override)
    return result.terminal_wealth[: cfg.kept(block)]


def simulate_wealth(
    params: ModelParams,
    cfg: SimConfig,
    strategy: StrategyPair,
    y0: float,
    z0: float,
    default_override: DefaultOverride = None,
) -> WealthPaths:
    """Simulate and record ``cfg.n_paths`` wealth paths under ``strategy``.

    Args:
        default_override: fixed default time(s) replacing the sampled ones
            (``np.inf`` for no default)

    Raises:
        SimulationError: if the wealth of a path becomes nonfinite
    """
    cfg.check_horizon(params.T)
    results = [
        _wealth_block(params, cfg, strategy, y0, z0, block, True, default_override)
        for block in range(cfg.n_blocks)
    ]
    n_paths = cfg.n_paths
    paths, times, sizes, retained = [], [], [], []
    for block, result in enumerate(results):
        assert result.claims is not None and result.retained_claims is not None
        mask = result.claims.path < cfg.kept(block)
        paths.append(result.claims.path[mask] + block * cfg.block_size)
        times.append(result.claims.time[mask])
        sizes.append(result.claims.size[mask])
        retained.append(result.retained_claims[mask])
    claim_path = np.concatenate(paths)
    order = np.lexsort((np.concatenate(times), claim_path))
    return WealthPaths(
        times=time_grid(cfg, 0.0, params.T),
        Z=_concat([r.Z for r in results], n_paths),
        Y=_concat([r.Y for r in results], n_paths),
        H=_concat([r.H for r in results], n_paths),
        default_times=_concat([r.default_times for r in results], n_paths),
        claims=ClaimSample(
            claim_path[order], np.concatenate(times)[order], np.concatenate(sizes)[order]
        ),
        retained_claims=np.concatenate(retained)[order],
    )
