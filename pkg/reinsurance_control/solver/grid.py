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

"""Uniform (t, z) lattice and fields stored on it."""

from dataclasses import dataclass, field
from logging import getLogger
from pathlib import Path
from typing import Literal, Union

import numpy as np

from ..errors import ModelError
from ..util import read_table, write_table

LOGGER = getLogger(__name__)

FieldKind = Literal["xi", "u"]

FIELD_COLUMNS = ("t", "z", "value")

DEFAULT_STRIDE = 100

_BOUNDARY_VALUE = {"xi": 1.0, "u": 0.0}
"""Value of the field on the boundary (and outside of the domain)."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform lattice z_i = -d + i*dz (i < n_space), t_j = j*dt (j < n_time).

    Only every ``stride``-th time column (and the terminal column) is stored
    by the solvers.
    """

    d: float
    n_space: int
    n_time: int
    T: float
    stride: int = DEFAULT_STRIDE

    def __post_init__(self):
        if self.n_space < 3:
            raise ModelError(f"At least 3 space nodes are required (got {self.n_space}).")
        if self.n_time < 2:
            raise ModelError(f"At least 2 time nodes are required (got {self.n_time}).")
        if not self.d > 0:
            raise ModelError(f"The half width d must be positive (got {self.d}).")
        if not self.T > 0:
            raise ModelError(f"The horizon T must be positive (got {self.T}).")
        if self.stride < 1:
            raise ModelError(f"The storage stride must be at least 1 (got {self.stride}).")

    @property
    def dz(self) -> float:
        return 2 * self.d / (self.n_space - 1)

    @property
    def dt(self) -> float:
        return self.T / (self.n_time - 1)

    @property
    def z(self) -> np.ndarray:
        return -self.d + np.arange(self.n_space) * self.dz

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n_time) * self.dt

    @property
    def stored_indices(self) -> np.ndarray:
        indices = np.arange(0, self.n_time, self.stride)
        if indices[-1] != self.n_time - 1:
            indices = np.append(indices, self.n_time - 1)
        return indices

    def is_stored(self, j: int) -> bool:
        return j % self.stride == 0 or j == self.n_time - 1


@dataclass(frozen=True)
class FieldGrid:
    """A real-valued field on the stored time columns of a lattice.

    ``values[:, k]`` belongs to the time ``times[k]``; the array is read only.
    """

    spec: GridSpec
    kind: FieldKind
    times: np.ndarray
    values: np.ndarray
    column_indices: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != (self.spec.n_space, len(self.times)):
            raise ModelError(
                f"Field shape {self.values.shape} does not match the lattice "
                f"({self.spec.n_space}, {len(self.times)})."
            )
        if not np.all(np.isfinite(self.values)):
            raise ModelError("Fields must be finite everywhere.")
        self.values.flags.writeable = False
        self.times.flags.writeable = False

    @property
    def boundary_value(self) -> float:
        return _BOUNDARY_VALUE[self.kind]

    @property
    def stride(self) -> int:
        return self.spec.stride

    def column_at(self, j: int) -> np.ndarray:
        """The stored column of lattice time index j."""
        position = np.searchsorted(self.column_indices, j)
        if position >= len(self.column_indices) or self.column_indices[position] != j:
            raise KeyError(f"Time index {j} is not stored (stride {self.stride}).")
        return self.values[:, position]

    def interpolate(self, t: float, z) -> Union[float, np.ndarray]:
        """Bilinear interpolation at time t for one or many factor values.

        Factor values outside of [-d, d] are clamped to the boundary, where
        the field takes its extension value.
        """
        spec = self.spec
        if not (-1e-12 <= t <= spec.T * (1 + 1e-12)):
            raise ModelError(f"Time t={t} outside of [0, {spec.T}].")
        z_arr = np.asarray(z, dtype=float)
        if np.any(np.abs(z_arr) > spec.d):
            LOGGER.warning(
                f"Factor values outside of [-{spec.d}, {spec.d}] were clamped to the boundary."
            )
            z_arr = np.clip(z_arr, -spec.d, spec.d)

        times = self.times
        if len(times) == 1:
            raise ModelError("Interpolation needs at least two stored time columns.")
        k = int(np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(times) - 2))
        t_weight = (t - times[k]) / (times[k + 1] - times[k])
        t_weight = min(max(t_weight, 0.0), 1.0)

        position = (z_arr + spec.d) / spec.dz
        # snap to nodes so that node queries reproduce stored values exactly
        nearest = np.round(position)
        position = np.where(np.abs(position - nearest) < 1e-9, nearest, position)
        i = np.clip(np.floor(position).astype(int), 0, spec.n_space - 2)
        z_weight = np.clip(position - i, 0.0, 1.0)

        lower = self.values[:, k]
        upper = self.values[:, k + 1]
        at_lower = lower[i] * (1 - z_weight) + lower[i + 1] * z_weight
        at_upper = upper[i] * (1 - z_weight) + upper[i + 1] * z_weight
        value = at_lower * (1 - t_weight) + at_upper * t_weight
        if np.ndim(value) == 0:
            return float(value)
        return value

    def map(self, fn, kind: FieldKind) -> "FieldGrid":
        """Apply an elementwise function, e.g. exp to turn a u field into a xi field."""
        return FieldGrid(
            spec=self.spec,
            kind=kind,
            times=self.times.copy(),
            values=fn(np.array(self.values)),
            column_indices=self.column_indices.copy(),
        )

    def to_csv(self, path: Union[str, Path]) -> str:
        """Write "t,z,value" rows (time outer, factor inner) and return the sha256 checksum."""
        t_grid, z_grid = np.meshgrid(self.times, self.spec.z, indexing="ij")
        rows = np.column_stack((t_grid.ravel(), z_grid.ravel(), self.values.T.ravel()))
        return write_table(path, FIELD_COLUMNS, rows)

    @staticmethod
    def from_csv(path: Union[str, Path], spec: GridSpec, kind: FieldKind) -> "FieldGrid":
        """Read a field written by :meth:`to_csv` for the given lattice."""
        rows = read_table(path, FIELD_COLUMNS)
        if rows.shape[0] % spec.n_space != 0:
            raise ModelError(f"'{path}' does not hold whole time columns of the lattice.")
        n_columns = rows.shape[0] // spec.n_space
        values = rows[:, 2].reshape(n_columns, spec.n_space).T.copy()
        times = rows[:: spec.n_space, 0].copy()
        column_indices = spec.stored_indices
        if len(column_indices) != n_columns:
            raise ModelError(
                f"'{path}' holds {n_columns} time columns but the lattice stores {len(column_indices)}."
            )
        return FieldGrid(
            spec=spec, kind=kind, times=times, values=values, column_indices=column_indices
        )


def interpolate(field_grid: FieldGrid, t: float, z) -> Union[float, np.ndarray]:
    """Bilinear interpolation of a field, see :meth:`FieldGrid.interpolate`."""
    return field_grid.interpolate(t, z)
