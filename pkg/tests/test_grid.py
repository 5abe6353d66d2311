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

import numpy as np
import pytest

from reinsurance_control.errors import ModelError
from reinsurance_control.solver.grid import FieldGrid, GridSpec, interpolate
from reinsurance_control.util import camelcase, file_checksum, read_table, write_table


def make_field(spec: GridSpec, fn) -> FieldGrid:
    indices = spec.stored_indices
    times = spec.t[indices]
    values = fn(times[None, :], spec.z[:, None])
    return FieldGrid(spec=spec, kind="xi", times=times, values=values, column_indices=indices)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"d": 2.0, "n_space": 2, "n_time": 11, "T": 1.0},
        {"d": 2.0, "n_space": 11, "n_time": 1, "T": 1.0},
        {"d": 0.0, "n_space": 11, "n_time": 11, "T": 1.0},
        {"d": 2.0, "n_space": 11, "n_time": 11, "T": -1.0},
        {"d": 2.0, "n_space": 11, "n_time": 11, "T": 1.0, "stride": 0},
    ],
)
def test_invalid_grid(kwargs):
    with pytest.raises(ModelError):
        GridSpec(**kwargs)


def test_grid_nodes():
    spec = GridSpec(d=2.0, n_space=401, n_time=50001, T=5.0)
    assert spec.dz == pytest.approx(0.01)
    assert spec.dt == pytest.approx(1e-4)
    assert spec.z[0] == -2.0 and spec.z[-1] == pytest.approx(2.0)
    assert spec.t[-1] == pytest.approx(5.0)


def test_stored_indices_keep_terminal_column():
    spec = GridSpec(d=1.0, n_space=5, n_time=11, T=1.0, stride=4)
    assert list(spec.stored_indices) == [0, 4, 8, 10]
    assert spec.is_stored(8) and spec.is_stored(10) and not spec.is_stored(9)
    default = GridSpec(d=1.0, n_space=5, n_time=301, T=1.0)
    assert list(default.stored_indices) == [0, 100, 200, 300]


def test_field_shape_is_checked():
    spec = GridSpec(d=1.0, n_space=5, n_time=3, T=1.0)
    with pytest.raises(ModelError):
        FieldGrid(
            spec=spec,
            kind="xi",
            times=spec.t,
            values=np.ones((4, 3)),
            column_indices=spec.stored_indices,
        )
    with pytest.raises(ModelError):
        FieldGrid(
            spec=spec,
            kind="xi",
            times=spec.t,
            values=np.full((5, 3), np.nan),
            column_indices=spec.stored_indices,
        )


def test_interpolation_is_exact_for_bilinear_fields():
    spec = GridSpec(d=1.0, n_space=11, n_time=21, T=2.0, stride=5)
    field = make_field(spec, lambda t, z: 1 + 0.5 * t + 0.25 * z)
    zs = np.linspace(-1, 1, 13)
    for t in (0.0, 0.3, 1.25, 2.0):
        assert np.allclose(field.interpolate(t, zs), 1 + 0.5 * t + 0.25 * zs)
    assert interpolate(field, 0.3, 0.1) == pytest.approx(1 + 0.15 + 0.025)


def test_interpolation_reproduces_nodes():
    spec = GridSpec(d=1.0, n_space=11, n_time=11, T=1.0)
    field = make_field(spec, lambda t, z: np.exp(t * z))
    for k, t in enumerate(field.times):
        assert np.array_equal(field.interpolate(float(t), spec.z), field.values[:, k])


def test_interpolation_clamps_outside(caplog):
    spec = GridSpec(d=1.0, n_space=11, n_time=11, T=1.0)
    field = make_field(spec, lambda t, z: 1 + z**2 + 0 * t)
    assert field.interpolate(0.5, 3.0) == pytest.approx(field.interpolate(0.5, 1.0))
    assert "clamped" in caplog.text
    with pytest.raises(ModelError):
        field.interpolate(1.5, 0.0)


def test_column_at():
    spec = GridSpec(d=1.0, n_space=5, n_time=11, T=1.0, stride=4)
    field = make_field(spec, lambda t, z: 1 + t + 0 * z)
    assert np.allclose(field.column_at(8), 1 + spec.t[8])
    with pytest.raises(KeyError):
        field.column_at(9)


def test_field_csv_round_trip_is_exact(tmp_path):
    spec = GridSpec(d=1.0, n_space=7, n_time=13, T=1.0, stride=3)
    field = make_field(spec, lambda t, z: np.exp(-t * np.sin(3 * z)) / 3)
    checksum = field.to_csv(tmp_path / "xi.csv")
    assert checksum == file_checksum(tmp_path / "xi.csv")
    loaded = FieldGrid.from_csv(tmp_path / "xi.csv", spec, "xi")
    assert np.array_equal(loaded.values, field.values)
    assert np.array_equal(loaded.times, field.times)
    assert (tmp_path / "xi.csv").read_text().splitlines()[0] == "t,z,value"
    # writing twice gives identical bytes
    assert field.to_csv(tmp_path / "again.csv") == checksum


def test_field_csv_for_other_lattice(tmp_path):
    spec = GridSpec(d=1.0, n_space=7, n_time=13, T=1.0, stride=3)
    make_field(spec, lambda t, z: 1 + 0 * t * z).to_csv(tmp_path / "xi.csv")
    with pytest.raises(ModelError):
        FieldGrid.from_csv(tmp_path / "xi.csv", GridSpec(d=1.0, n_space=7, n_time=13, T=1.0), "xi")


def test_table_header_is_checked(tmp_path):
    write_table(tmp_path / "table.csv", ("a", "b"), np.arange(6.0))
    assert read_table(tmp_path / "table.csv", ("a", "b")).shape == (3, 2)
    with pytest.raises(ValueError):
        read_table(tmp_path / "table.csv", ("a", "c"))


def test_camelcase():
    assert camelcase("n_paths") == "nPaths"
    assert camelcase("seed") == "seed"
