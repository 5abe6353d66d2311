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

from math import exp, isinf

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftests import TEST_MODEL, params, solved, spec, tmp_app
from reinsurance_control.errors import ModelError, SimulationError
from reinsurance_control.model.functions import effective_bond_drift, premium_rate
from reinsurance_control.model.params import ModelParams
from reinsurance_control.schemas import dump_grid, dump_model
from reinsurance_control.simulation.config import SimConfig
from reinsurance_control.simulation.estimators import (
    default_martingale_residual,
    feynman_kac_xi,
    mc_expected_utility,
    paired_difference,
    summarize,
    utility,
)
from reinsurance_control.simulation.paths import (
    simulate_claims,
    simulate_default,
    simulate_factor,
    simulate_wealth,
    terminal_wealth_block,
    time_grid,
)
from reinsurance_control.simulation.streams import block_generator, normals
from reinsurance_control.strategy.value import (
    POST_DEFAULT,
    PRE_DEFAULT,
    StrategyPair,
    StrategySurface,
    optimal_strategy,
)
from reinsurance_control.tasks.simulation import simulate_utility_block


def constant_strategy(l: float, m: float, a: float) -> StrategyPair:
    return StrategyPair(
        pre=StrategySurface.constant(l, m, a, PRE_DEFAULT),
        post=StrategySurface.constant(l, 0.0, a, POST_DEFAULT),
    )


def euler_growth(params: ModelParams, rate: float, steps: int, dt: float) -> float:
    """Terminal value of dY = (r*Y + rate) dt from Y=0 under the explicit Euler scheme."""
    return rate * ((1 + params.r * dt) ** steps - 1) / params.r


@pytest.mark.parametrize(
    "kwargs",
    [
        {"seed": -1, "n_paths": 10, "dt_sim": 0.01},
        {"seed": 1, "n_paths": 0, "dt_sim": 0.01},
        {"seed": 1, "n_paths": 10, "dt_sim": 0.0},
        {"seed": 1, "n_paths": 10, "dt_sim": 0.01, "block_size": 1},
        {"seed": 1, "n_paths": 11, "dt_sim": 0.01, "antithetic": True},
        {"seed": 1, "n_paths": 10, "dt_sim": 0.01, "antithetic": True, "block_size": 5},
    ],
)
def test_invalid_sim_config(kwargs):
    with pytest.raises(ModelError):
        SimConfig(**kwargs)


def test_sim_config_blocks():
    cfg = SimConfig(seed=1, n_paths=70, dt_sim=0.01, block_size=32)
    assert cfg.n_blocks == 3
    assert [cfg.kept(b) for b in range(3)] == [32, 32, 6]
    assert cfg.steps(1.0) == 100
    assert cfg.steps(0.995) == 100


def test_horizon_check():
    cfg = SimConfig(seed=1, n_paths=2, dt_sim=0.05)
    cfg.check_horizon(5.0)
    with pytest.raises(ModelError, match="T/100"):
        cfg.check_horizon(1.0)


def test_time_grid_ends_at_maturity():
    cfg = SimConfig(seed=1, n_paths=2, dt_sim=0.03)
    times = time_grid(cfg, 0.5, 1.0)
    assert times[0] == 0.5
    assert times[-1] == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.diff(times) <= 0.03)


def test_block_generator_is_deterministic():
    first = block_generator(5, 2, 3).standard_normal(8)
    second = block_generator(5, 2, 3).standard_normal(8)
    np.testing.assert_array_equal(first, second)
    other_stream = block_generator(5, 1, 3).standard_normal(8)
    other_block = block_generator(5, 2, 4).standard_normal(8)
    assert not np.array_equal(first, other_stream)
    assert not np.array_equal(first, other_block)


def test_antithetic_normals_are_mirrored():
    draws = normals(block_generator(1, 0, 0), 10, antithetic=True)
    np.testing.assert_array_equal(draws[0::2], -draws[1::2])


@settings(deadline=None, max_examples=10)
@given(n_small=st.integers(min_value=1, max_value=20), extra=st.integers(min_value=0, max_value=40))
def test_paths_do_not_depend_on_path_count(params, n_small, extra):
    small = SimConfig(seed=3, n_paths=n_small, dt_sim=0.01, block_size=16)
    large = SimConfig(seed=3, n_paths=n_small + extra, dt_sim=0.01, block_size=16)
    a = simulate_factor(params, small, 0.0)
    b = simulate_factor(params, large, 0.0)
    assert a.values.shape == (n_small, 101)
    np.testing.assert_array_equal(a.values, b.values[:n_small])


def test_factor_terminal_only(params):
    cfg = SimConfig(seed=3, n_paths=20, dt_sim=0.01, block_size=8)
    full = simulate_factor(params, cfg, 0.5)
    terminal = simulate_factor(params, cfg, 0.5, terminal_only=True)
    assert np.all(full.values[:, 0] == 0.5)
    np.testing.assert_array_equal(terminal.values[:, 0], full.values[:, -1])
    assert terminal.times[0] == full.times[-1]


def test_no_default_without_intensity():
    params = ModelParams(**{**TEST_MODEL, "h_p": 0.0})
    cfg = SimConfig(seed=1, n_paths=50, dt_sim=0.01)
    assert all(isinf(tau) for tau in simulate_default(params, cfg))


def test_default_frequency(params):
    cfg = SimConfig(seed=11, n_paths=4000, dt_sim=0.01, block_size=1000)
    tau = simulate_default(params, cfg)
    defaulted = np.isfinite(tau)
    assert np.all(tau[defaulted] <= params.T)
    expected = 1 - exp(-params.h_p * params.T)
    stderr = np.sqrt(expected * (1 - expected) / len(tau))
    assert abs(defaulted.mean() - expected) <= 4 * stderr


def test_default_compensator_is_martingale(params):
    cfg = SimConfig(seed=12, n_paths=4000, dt_sim=0.01, block_size=1000)
    residual = default_martingale_residual(params, cfg)
    assert residual.within(0.0, 4)


def test_claims_are_sorted_and_counted(params):
    cfg = SimConfig(seed=5, n_paths=2000, dt_sim=0.01, block_size=500)
    claims = simulate_claims(params, cfg)
    assert np.all(np.diff(claims.path) >= 0)
    same_path = np.diff(claims.path) == 0
    assert np.all(np.diff(claims.time)[same_path] >= 0)
    assert np.all((claims.time >= 0) & (claims.time <= params.T))
    assert claims.path.max() < cfg.n_paths
    expected_count = params.lambda_claims * params.T
    assert len(claims.path) / cfg.n_paths == pytest.approx(expected_count, rel=0.05)
    assert claims.size.mean() == pytest.approx(params.mu_inf, rel=0.05)


@settings(deadline=None, max_examples=5)
@given(
    ou_rate=st.floats(min_value=0.05, max_value=0.5),
    z0=st.floats(min_value=-1.0, max_value=1.0),
)
def test_factor_moments_match_the_ou_law(ou_rate, z0):
    params = ModelParams(**{**TEST_MODEL, "ou_rate": ou_rate})
    cfg = SimConfig(seed=21, n_paths=4000, dt_sim=0.01, block_size=1000)
    terminal = simulate_factor(params, cfg, z0, terminal_only=True).values[:, 0]
    decay = exp(-ou_rate * params.T)
    mean = params.ou_mean + (z0 - params.ou_mean) * decay
    variance = params.beta**2 * (1 - decay**2) / (2 * ou_rate)
    assert abs(terminal.mean() - mean) <= 4 * np.sqrt(variance / len(terminal)) + 2e-3
    # relative standard error of a normal sample variance is sqrt(2/(n-1))
    assert terminal.var(ddof=1) == pytest.approx(variance, rel=4 * np.sqrt(2 / (len(terminal) - 1)))


@settings(deadline=None, max_examples=10)
@given(retention=st.floats(min_value=0.05, max_value=3.0))
def test_retained_claim_mean(params, retention):
    cfg = SimConfig(seed=8, n_paths=2000, dt_sim=0.01, block_size=500)
    retained = np.minimum(simulate_claims(params, cfg).size, retention)
    expected = -np.expm1(-params.b * retention) / params.b
    stderr = retained.std(ddof=1) / np.sqrt(len(retained))
    assert abs(retained.mean() - expected) <= 4 * stderr


def test_full_reinsurance_wealth_is_deterministic(params):
    cfg = SimConfig(seed=2, n_paths=8, dt_sim=0.01, block_size=4)
    strategy = constant_strategy(0.0, 0.0, 0.0)
    wealth = terminal_wealth_block(params, cfg, strategy, 0.0, 0.0, 0)
    rate = float(premium_rate(params, 0.0))
    expected = euler_growth(params, rate, 100, 0.01)
    np.testing.assert_allclose(wealth, expected, rtol=1e-9)


def test_default_jump_and_lost_coupon(params):
    cfg = SimConfig(seed=2, n_paths=4, dt_sim=0.01, block_size=4)
    strategy = constant_strategy(0.0, 1.0, 0.0)
    survived = terminal_wealth_block(params, cfg, strategy, 0.0, 0.0, 0, default_override=np.inf)
    defaulted = terminal_wealth_block(params, cfg, strategy, 0.0, 0.0, 0, default_override=0.5)
    growth = 1 + params.r * 0.01
    expected_gap = (
        effective_bond_drift(params) * (growth**50 - 1) / params.r + params.zeta * growth**50
    )
    np.testing.assert_allclose(survived - defaulted, expected_gap, rtol=1e-9)


def test_recorded_paths(params, tmp_path):
    cfg = SimConfig(seed=4, n_paths=6, dt_sim=0.01, antithetic=True, block_size=4)
    strategy = constant_strategy(0.5, 1.0, 0.3)
    paths = simulate_wealth(params, cfg, strategy, 1.0, 0.0)
    assert len(paths) == 6
    assert paths.Y.shape == paths.Z.shape == paths.H.shape == (6, 101)
    assert np.all(paths.Y[:, 0] == 1.0)
    assert np.all(np.diff(paths.H, axis=1) >= 0)
    np.testing.assert_allclose(paths.retained_claims, np.minimum(paths.claims.size, 0.3))
    wealth = terminal_wealth_block(params, cfg, strategy, 1.0, 0.0, 0)
    np.testing.assert_allclose(paths.Y[:4, -1], wealth)

    single = paths.path(2)
    assert np.all(single.retained_claims <= 0.3)
    assert len(single.claim_times) == int(np.sum(paths.claims.path == 2))

    target = tmp_path / "paths.csv"
    paths.to_csv(target, max_paths=2)
    lines = target.read_text().splitlines()
    assert lines[0] == "path,t,Z,Y,H"
    assert len(lines) == 1 + 2 * 101


def test_nonfinite_wealth_is_reported(params):
    cfg = SimConfig(seed=2, n_paths=4, dt_sim=0.01, block_size=4)
    strategy = constant_strategy(np.inf, 0.0, 0.0)
    with pytest.raises(SimulationError):
        terminal_wealth_block(params, cfg, strategy, 0.0, 0.0, 0)


def test_summarize_averages_antithetic_pairs():
    cfg = SimConfig(seed=1, n_paths=4, dt_sim=0.01, antithetic=True, block_size=4)
    estimate = summarize(np.array([1.0, 3.0, 2.0, 4.0]), cfg)
    assert estimate.estimate == 2.5
    assert estimate.stderr == pytest.approx(0.5)
    assert estimate.to_dict() == {"estimate": 2.5, "stderr": estimate.stderr, "nPaths": 4, "seed": 1}


def test_paired_difference_of_identical_samples():
    cfg = SimConfig(seed=1, n_paths=3, dt_sim=0.01)
    samples = np.array([0.1, 0.2, 0.4])
    difference = paired_difference(samples, samples, cfg)
    assert difference.estimate == 0.0
    assert difference.stderr == 0.0


def test_expected_utility_of_deterministic_wealth(params):
    cfg = SimConfig(seed=1, n_paths=6, dt_sim=0.01, block_size=4)
    estimate = mc_expected_utility(params, cfg, constant_strategy(0.0, 0.0, 0.0), 0.0, 0.0)
    wealth = euler_growth(params, float(premium_rate(params, 0.0)), 100, 0.01)
    assert estimate.estimate == pytest.approx(-exp(-params.alpha * wealth), rel=1e-9)
    assert estimate.stderr == pytest.approx(0.0, abs=1e-15)


def test_feynman_kac_constant_coefficient(params):
    cfg = SimConfig(seed=1, n_paths=8, dt_sim=0.01, block_size=8)
    estimate = feynman_kac_xi(params, cfg, 0.0, 0.0, coef=lambda s, z: 0.3)
    assert estimate.estimate == pytest.approx(exp(-0.3 * params.T), rel=1e-12)


def test_feynman_kac_matches_lattice_solution(solved):
    params = solved.params
    cfg = SimConfig(seed=21, n_paths=2000, dt_sim=0.01, antithetic=True, block_size=500)
    estimate = feynman_kac_xi(params, cfg, 0.0, 0.0, absorb_at=solved.spec.d)
    assert estimate.within(solved.xi_post.interpolate(0.0, 0.0), 4, allowance=5e-3)


def test_optimal_strategy_simulation_is_reproducible(solved):
    cfg = SimConfig(seed=8, n_paths=16, dt_sim=0.01, antithetic=True, block_size=8)
    strategy = optimal_strategy(solved.vf)
    first = mc_expected_utility(solved.params, cfg, strategy, 0.0, 0.0)
    second = mc_expected_utility(solved.params, cfg, strategy, 0.0, 0.0)
    assert first == second
    assert np.isfinite(first.estimate) and first.estimate < 0.0


def test_utility_block_task(tmp_app, solved, tmp_path):
    cfg = SimConfig(seed=9, n_paths=8, dt_sim=0.01, antithetic=True, block_size=4)
    xi_post_path, xi_pre_path = tmp_path / "xi_post.csv", tmp_path / "xi_pre.csv"
    solved.xi_post.to_csv(xi_post_path)
    solved.pre.xi.to_csv(xi_pre_path)
    fields = {
        "grid": dump_grid(solved.spec),
        "xiPost": str(xi_post_path),
        "xiPre": str(xi_pre_path),
    }
    sim = {
        "seed": cfg.seed,
        "nPaths": cfg.n_paths,
        "dtSim": cfg.dt_sim,
        "antithetic": cfg.antithetic,
        "blockSize": cfg.block_size,
    }
    with tmp_app.app_context():
        result = simulate_utility_block(dump_model(solved.params), sim, fields, {}, 0.0, 0.0, 1)
    wealth = terminal_wealth_block(solved.params, cfg, optimal_strategy(solved.vf), 0.0, 0.0, 1)
    np.testing.assert_allclose(result, utility(solved.params, wealth), rtol=1e-10)
