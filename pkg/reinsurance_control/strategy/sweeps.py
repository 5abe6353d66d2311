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

"""Parameter sweeps of the closed-form controls."""

from dataclasses import replace
from typing import Sequence

import numpy as np

from ..model.functions import a_star, l_star, m_star_bounds
from ..model.params import ModelParams

BOND_SWEEP_COLUMNS = ("inverse_delta", "zeta", "theta", "m", "m_discounted")
RETENTION_SWEEP_COLUMNS = ("t", "alpha", "theta", "a")
STOCK_SWEEP_COLUMNS = ("t", "alpha", "z", "l", "l_equal_volatility")

EQUAL_VOLATILITY = 1.0
"""sigma(0) of the Scott volatility."""


def factor_nodes(half_width: float, n: int) -> np.ndarray:
    """n equidistant factor values z_i = -a + i*h (i < n) with h = 2a/(n-1)."""
    return np.linspace(-half_width, half_width, n)


def bond_sweep(
    params: ModelParams,
    inverse_deltas: Sequence[float],
    zetas: Sequence[float],
    thetas: Sequence[float],
    time_to_maturity: float = 1.0,
) -> np.ndarray:
    """m* = ln(1/Delta)/(alpha*zeta) in the regime where xi_pre equals xi_post.

    ``m`` is the value at maturity, ``m_discounted`` the value
    ``time_to_maturity`` before it.
    """
    rows = []
    t = params.T - time_to_maturity
    for theta in thetas:
        for zeta in zetas:
            for inverse_delta in inverse_deltas:
                swept = replace(
                    params, theta=theta, zeta=zeta, delta=1 / inverse_delta, relaxed=True
                )
                _, at_maturity = m_star_bounds(swept, swept.T)
                _, discounted = m_star_bounds(swept, t)
                rows.append((inverse_delta, zeta, theta, at_maturity, discounted))
    return np.array(rows, dtype=float)


def retention_sweep(
    params: ModelParams,
    ts: Sequence[float],
    alphas: Sequence[float],
    thetas: Sequence[float],
) -> np.ndarray:
    """a*(t) for every combination of risk aversion and reinsurer loading."""
    ts = np.asarray(ts, dtype=float)
    rows = []
    for alpha in alphas:
        for theta in thetas:
            swept = replace(params, alpha=alpha, theta=theta, relaxed=True)
            a = np.asarray(a_star(swept, ts))
            rows.append(np.column_stack((ts, np.full_like(ts, alpha), np.full_like(ts, theta), a)))
    return np.vstack(rows)


def stock_sweep(
    params: ModelParams,
    ts: Sequence[float],
    alphas: Sequence[float],
    zs: Sequence[float],
    equal_volatility: float = EQUAL_VOLATILITY,
) -> np.ndarray:
    """l*(t, z) for every combination of risk aversion and factor node.

    The last column holds l* when every factor node shares the constant
    volatility ``equal_volatility``.
    """
    ts = np.asarray(ts, dtype=float)
    rows = []
    for alpha in alphas:
        swept = replace(params, alpha=alpha)
        flat = replace(swept, sigma_kind="constant", sigma_const=equal_volatility)
        for z in zs:
            l = np.asarray(l_star(swept, ts, z)) * np.ones_like(ts)
            l_flat = np.asarray(l_star(flat, ts, z)) * np.ones_like(ts)
            rows.append(
                np.column_stack((ts, np.full_like(ts, alpha), np.full_like(ts, z), l, l_flat))
            )
    return np.vstack(rows)
