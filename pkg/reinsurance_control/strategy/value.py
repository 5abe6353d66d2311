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

"""Value functions and optimal strategies assembled from the solved fields."""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np

from ..errors import ModelError
from ..model.functions import a_star, l_star, m_star
from ..model.params import ModelParams
from ..solver.grid import FieldGrid
from ..util import write_table

VALUE_COLUMNS = ("t", "y", "V_pre", "V_post")
STRATEGY_COLUMNS = ("t", "z", "l", "m", "a")

PRE_DEFAULT = 0
POST_DEFAULT = 1


def _check_state(H: int):
    if H not in (PRE_DEFAULT, POST_DEFAULT):
        raise ModelError(f"The default state must be 0 or 1 (got {H}).")


@dataclass(frozen=True)
class ValueFunction:
    """V(t, y, z, H) = -xi_H(t, z) * exp(-alpha * y * e^{r(T-t)})."""

    params: ModelParams
    xi_post: FieldGrid
    xi_pre: FieldGrid

    def __post_init__(self):
        if self.xi_post.spec != self.xi_pre.spec:
            raise ModelError("xi_post and xi_pre must live on the same lattice.")
        if self.xi_post.kind != "xi" or self.xi_pre.kind != "xi":
            raise ModelError("The value function needs xi fields (not log fields).")
        if abs(self.xi_post.spec.T - self.params.T) > 1e-12 * self.params.T:
            raise ModelError(
                f"The fields were solved for T={self.xi_post.spec.T}, the model has T={self.params.T}."
            )

    def field(self, H: int) -> FieldGrid:
        _check_state(H)
        return self.xi_post if H == POST_DEFAULT else self.xi_pre


def value(vf: ValueFunction, t: float, y, z, H: int):
    """Value of wealth ``y`` at time ``t`` and factor ``z`` in default state ``H``."""
    xi = vf.field(H).interpolate(t, z)
    params = vf.params
    exponent = -params.alpha * np.asarray(y, dtype=float) * np.exp(params.r * (params.T - t))
    result = -np.asarray(xi) * np.exp(exponent)
    if np.ndim(result) == 0:
        return float(result)
    return result


class StrategyPoint(NamedTuple):
    l: float
    m: float
    a: float


FactorControl = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class StrategySurface:
    """The controls (l, m, a) of one default state as functions of t (and z)."""

    l: FactorControl
    m: FactorControl
    a: Callable[[float], float]
    default_state: int

    def __post_init__(self):
        _check_state(self.default_state)

    def at(self, t: float, z) -> StrategyPoint:
        return StrategyPoint(
            float(self.l(t, np.asarray(z, dtype=float))),
            float(self.m(t, np.asarray(z, dtype=float))),
            float(self.a(t)),
        )

    @staticmethod
    def constant(l: float, m: float, a: float, default_state: int) -> "StrategySurface":
        """A fixed (open loop) strategy, mostly useful to test the simulator."""
        if default_state == POST_DEFAULT and m != 0:
            raise ModelError("No bond can be held after default.")
        return StrategySurface(
            l=lambda t, z: np.full_like(z, l, dtype=float),
            m=lambda t, z: np.full_like(z, m, dtype=float),
            a=lambda t: a,
            default_state=default_state,
        )


class StrategyPair(NamedTuple):
    """Controls used before and after the default of the bond."""

    pre: StrategySurface
    post: StrategySurface

    def for_state(self, H: int) -> StrategySurface:
        _check_state(H)
        return self.post if H == POST_DEFAULT else self.pre


def strategy_surface(
    vf: ValueFunction,
    H: int,
    l_scale: float = 1.0,
    m_scale: float = 1.0,
    a_scale: float = 1.0,
) -> StrategySurface:
    """The optimal controls of state ``H``, optionally scaled to build perturbed strategies."""
    _check_state(H)
    params = vf.params

    def stock(t: float, z: np.ndarray) -> np.ndarray:
        return l_scale * np.asarray(l_star(params, t, z))

    def retention(t: float) -> float:
        return a_scale * a_star(params, t)

    if H == POST_DEFAULT:
        return StrategySurface(
            l=stock, m=lambda t, z: np.zeros_like(z, dtype=float), a=retention, default_state=H
        )

    half_width = vf.xi_post.spec.d

    def bond(t: float, z: np.ndarray) -> np.ndarray:
        # outside of the lattice the fields keep their boundary values
        z = np.clip(z, -half_width, half_width)
        return m_scale * np.asarray(
            m_star(params, t, vf.xi_pre.interpolate(t, z), vf.xi_post.interpolate(t, z))
        )

    return StrategySurface(l=stock, m=bond, a=retention, default_state=H)


def optimal_strategy(vf: ValueFunction, **scales: float) -> StrategyPair:
    """Pre- and post-default surfaces; ``scales`` are passed to :func:`strategy_surface`."""
    return StrategyPair(
        pre=strategy_surface(vf, PRE_DEFAULT, **scales),
        post=strategy_surface(vf, POST_DEFAULT, **scales),
    )


def strategy_at(vf: ValueFunction, t: float, z: float, H: int) -> StrategyPoint:
    """Optimal (l*, m*, a*) at one point; m* is 0 after default."""
    return strategy_surface(vf, H).at(t, z)


def value_table(
    vf: ValueFunction,
    ts: Sequence[float],
    ys: Sequence[float],
    z: float,
    path: Union[str, Path, None] = None,
) -> np.ndarray:
    """Rows (t, y, V_pre, V_post) for all combinations, time outer; optionally written as CSV."""
    rows = []
    ys = np.asarray(ys, dtype=float)
    for t in ts:
        v_pre = value(vf, t, ys, np.full_like(ys, z), PRE_DEFAULT)
        v_post = value(vf, t, ys, np.full_like(ys, z), POST_DEFAULT)
        rows.append(np.column_stack((np.full_like(ys, t), ys, v_pre, v_post)))
    table = np.vstack(rows)
    if path is not None:
        write_table(path, VALUE_COLUMNS, table)
    return table


def strategy_table(
    vf: ValueFunction,
    ts: Sequence[float],
    zs: Sequence[float],
    H: int,
    path: Union[str, Path, None] = None,
) -> np.ndarray:
    """Rows (t, z, l, m, a) for all combinations, time outer; optionally written as CSV."""
    surface = strategy_surface(vf, H)
    zs = np.asarray(zs, dtype=float)
    rows = []
    for t in ts:
        rows.append(
            np.column_stack(
                (
                    np.full_like(zs, t),
                    zs,
                    surface.l(t, zs),
                    surface.m(t, zs),
                    np.full_like(zs, surface.a(t)),
                )
            )
        )
    table = np.vstack(rows)
    if path is not None:
        write_table(path, STRATEGY_COLUMNS, table)
    return table
