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

from dataclasses import replace
from math import exp, log

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftests import params, solved, spec
from reinsurance_control.errors import ModelError
from reinsurance_control.model.functions import a_star, l_star, m_star_bounds
from reinsurance_control.strategy.monotonicity import check_monotonicity_suite
from reinsurance_control.strategy.sweeps import (
    bond_sweep,
    factor_nodes,
    retention_sweep,
    stock_sweep,
)
from reinsurance_control.strategy.value import (
    POST_DEFAULT,
    PRE_DEFAULT,
    STRATEGY_COLUMNS,
    VALUE_COLUMNS,
    StrategySurface,
    ValueFunction,
    optimal_strategy,
    strategy_at,
    strategy_surface,
    strategy_table,
    value,
    value_table,
)


def test_value_function_needs_xi_fields(solved):
    with pytest.raises(ModelError):
        ValueFunction(solved.params, solved.xi_post, solved.pre.u)


def test_value_at_maturity(solved):
    for H in (PRE_DEFAULT, POST_DEFAULT):
        assert value(solved.vf, solved.params.T, 2.0, 0.3, H) == pytest.approx(
            -exp(-solved.params.alpha * 2.0)
        )
    with pytest.raises(ModelError):
        value(solved.vf, 0.0, 0.0, 0.0, 2)


def test_value_increasing_in_wealth(solved):
    ys = np.linspace(-10, 10, 21)
    for H in (PRE_DEFAULT, POST_DEFAULT):
        v = value(solved.vf, 0.0, ys, np.zeros_like(ys), H)
        assert np.all(np.diff(v) > 0)
        assert np.all(v < 0)


def test_pre_default_value_dominates(solved):
    zs = np.linspace(-1, 1, 11)
    for t in (0.0, 0.25, 0.5):
        pre = value(solved.vf, t, 1.0, zs, PRE_DEFAULT)
        post = value(solved.vf, t, 1.0, zs, POST_DEFAULT)
        assert np.all(pre >= post * (1 + 1e-3))


def test_post_default_strategy(solved):
    point = strategy_at(solved.vf, 0.5, 0.2, POST_DEFAULT)
    assert point.m == 0.0
    assert point.a == pytest.approx(a_star(solved.params, 0.5))
    assert point.l == pytest.approx(l_star(solved.params, 0.5, 0.2))


def test_pre_default_bond_within_bounds(solved):
    params = solved.params
    for t in (0.0, 0.5, 0.9):
        lower, upper = m_star_bounds(params, t)
        slack = 1e-3 * params.discount(t) / (params.alpha * params.zeta)
        for z in np.linspace(-1, 1, 9):
            m = strategy_at(solved.vf, t, z, PRE_DEFAULT).m
            assert lower - slack <= m <= upper + slack


def test_bond_lookup_is_clipped(solved, caplog):
    surface = strategy_surface(solved.vf, PRE_DEFAULT)
    assert surface.at(0.5, 3.0).m == surface.at(0.5, 2.0).m
    assert "clamped" not in caplog.text


def test_scaled_strategy(solved):
    base = optimal_strategy(solved.vf)
    scaled = optimal_strategy(solved.vf, l_scale=1.5, m_scale=0.0, a_scale=0.5)
    base_point, scaled_point = base.pre.at(0.3, 0.0), scaled.pre.at(0.3, 0.0)
    assert scaled_point.l == pytest.approx(1.5 * base_point.l)
    assert scaled_point.m == 0.0
    assert scaled_point.a == pytest.approx(0.5 * base_point.a)
    assert base.for_state(POST_DEFAULT) is base.post


def test_constant_strategy():
    surface = StrategySurface.constant(1.0, 0.5, 2.0, PRE_DEFAULT)
    assert surface.at(0.1, -1.0) == (1.0, 0.5, 2.0)
    with pytest.raises(ModelError):
        StrategySurface.constant(1.0, 0.5, 2.0, POST_DEFAULT)
    with pytest.raises(ModelError):
        StrategySurface.constant(1.0, 0.0, 2.0, 3)


def test_value_table(solved, tmp_path):
    table = value_table(solved.vf, [0.0, 0.5], [0.0, 1.0, 2.0], 0.0, tmp_path / "values.csv")
    assert table.shape == (6, len(VALUE_COLUMNS))
    assert (tmp_path / "values.csv").read_text().splitlines()[0] == ",".join(VALUE_COLUMNS)
    assert np.all(table[:, 2] >= table[:, 3] * (1 + 1e-3))


def test_strategy_table(solved, tmp_path):
    zs = np.linspace(-1, 1, 5)
    table = strategy_table(solved.vf, [0.0, 1.0], zs, PRE_DEFAULT, tmp_path / "strategy.csv")
    assert table.shape == (10, len(STRATEGY_COLUMNS))
    assert np.allclose(table[5:, 4], a_star(solved.params, 1.0))
    post = strategy_table(solved.vf, [0.0], zs, POST_DEFAULT)
    assert np.all(post[:, 3] == 0.0)


@settings(deadline=None, max_examples=10)
@given(scale=st.floats(min_value=1e-2, max_value=1e2))
def test_strategy_ignores_a_common_scale_of_the_value(solved, scale):
    scaled = ValueFunction(
        solved.params,
        solved.xi_post.map(lambda v: scale * v, "xi"),
        solved.xi_pre.map(lambda v: scale * v, "xi"),
    )
    for t, z in ((0.0, 0.0), (0.4, -0.7), (0.9, 1.2)):
        assert value(scaled, t, 1.0, z, PRE_DEFAULT) == pytest.approx(
            scale * value(solved.vf, t, 1.0, z, PRE_DEFAULT), rel=1e-12
        )
        for H in (PRE_DEFAULT, POST_DEFAULT):
            base, other = strategy_at(solved.vf, t, z, H), strategy_at(scaled, t, z, H)
            assert other.l == base.l and other.a == base.a
            assert other.m == pytest.approx(base.m, rel=1e-9, abs=1e-9)


def test_monotonicity_suite(solved):
    report = check_monotonicity_suite(solved.vf, field_tolerance=1e-2)
    assert report.passed, report.to_dict()
    for name in (
        "value_increasing_in_y",
        "retention_increasing_in_t",
        "stock_decreasing_in_z",
        "stock_increasing_in_t",
        "controls_halve_when_alpha_doubles",
    ):
        assert report[name].passed
        assert report[name].worst_violation <= 1e-6
    assert not report["bond_dips_in_z"].gating
    with pytest.raises(KeyError):
        report["unknown"]


def test_monotonicity_suite_with_relaxed_loadings(solved):
    relaxed = replace(solved.params, theta=solved.params.eta, relaxed=True)
    report = check_monotonicity_suite(
        ValueFunction(relaxed, solved.xi_post, solved.xi_pre), field_tolerance=1e-2
    )
    assert report["controls_halve_when_alpha_doubles"].passed
    assert "no_bond_at_full_premium" in {claim.name for claim in report.claims}


def test_factor_nodes():
    nodes = factor_nodes(2.0, 10)
    assert len(nodes) == 10
    assert nodes[0] == -2.0 and nodes[-1] == 2.0
    assert np.allclose(np.diff(nodes), 4.0 / 9)


def test_bond_sweep(params):
    table = bond_sweep(params, [1.0, 2.0, 4.0], [0.2, 0.4], [0.5])
    assert table.shape == (6, 5)
    at_one = table[table[:, 0] == 1.0]
    assert np.all(at_one[:, 3] == 0.0)
    row = table[(table[:, 0] == 4.0) & (table[:, 1] == 0.4)][0]
    assert row[3] == pytest.approx(log(4.0) / (params.alpha * 0.4))
    assert row[4] == pytest.approx(row[3] * exp(-params.r))


def test_retention_and_stock_sweeps(params):
    ts = np.linspace(0, params.T, 5)
    retention = retention_sweep(params, ts, [0.02, 0.04], [1.0])
    first, second = retention[:5, 3], retention[5:, 3]
    assert np.allclose(second, first / 2)
    assert np.all(np.diff(first) > 0)
    stock = stock_sweep(params, ts, [0.02], [-1.0, 0.0, 1.0])
    assert stock.shape == (15, 5)
    low, origin, high = stock[:5], stock[5:10], stock[10:]
    assert np.all(low[:, 3] > high[:, 3])
    # equal volatility removes the dependence on the factor
    assert np.allclose(low[:, 4], high[:, 4])
    assert np.allclose(origin[:, 4], origin[:, 3])
    assert np.all(low[:, 3] > low[:, 4])
