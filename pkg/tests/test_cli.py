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

import json
from pathlib import Path

import pytest

from conftests import cli_runner, run_config, tmp_app
from reinsurance_control.errors import MissingArtifactError
from reinsurance_control.runs.artifacts import (
    ESTIMATE_JSON,
    MANIFEST_JSON,
    PATHS_CSV,
    RUNTIME_JSON,
    U_PRE_CSV,
    VERIFY_JSON,
    XI_POST_CSV,
    XI_PRE_CSV,
)
from reinsurance_control.runs.cli import parse_figures
from reinsurance_control.runs.figures import figures_function
from reinsurance_control.runs.simulate import simulate_function
from reinsurance_control.runs.solve import solve_function
from reinsurance_control.runs.verify import QUICK_OUTPUTS, _verification_checks, verify_function
from reinsurance_control.schemas import load_run_config
from reinsurance_control.strategy.value import ValueFunction


@pytest.fixture()
def config_file(run_config, tmp_path) -> Path:
    path = tmp_path / "run.json"
    path.write_text(json.dumps(run_config))
    return path


def test_solve_writes_fields(tmp_app, run_config):
    run = load_run_config(run_config)
    result = solve_function(tmp_app, run)
    outputs = run.outputs
    for name in (XI_POST_CSV, U_PRE_CSV, XI_PRE_CSV, MANIFEST_JSON, RUNTIME_JSON):
        assert (outputs / name).is_file()
    manifest = json.loads((outputs / MANIFEST_JSON).read_text())
    assert manifest["grid"] == {"d": 2.0, "N": 41, "Mt": 401, "stride": 10}
    assert manifest["model"]["alpha"] == 0.02
    assert set(manifest["checks"]) == {"sandwich", "closedFormShift"}
    assert manifest["checks"]["sandwich"]["passed"]
    assert set(manifest["checksums"]) == {XI_POST_CSV, U_PRE_CSV, XI_PRE_CSV}
    assert "timings" not in manifest
    assert "timings" in json.loads((outputs / RUNTIME_JSON).read_text())
    assert result.xi_post.times[-1] == pytest.approx(1.0)
    header = (outputs / XI_POST_CSV).read_text().splitlines()[0]
    assert header == "t,z,value"


def test_solve_is_reproducible(tmp_app, run_config):
    run = load_run_config(run_config)
    solve_function(tmp_app, run)
    first = (run.outputs / MANIFEST_JSON).read_bytes()
    fields = (run.outputs / XI_PRE_CSV).read_bytes()
    solve_function(tmp_app, run)
    assert (run.outputs / MANIFEST_JSON).read_bytes() == first
    assert (run.outputs / XI_PRE_CSV).read_bytes() == fields


def test_reduction_check_without_default(tmp_app, run_config):
    config = {**run_config, "model": {**run_config["model"], "hP": 0.0}}
    result = solve_function(tmp_app, load_run_config(config))
    reduction = result.checks["reduction"]
    assert not reduction.gating
    assert reduction.tolerance == 1e-6
    assert reduction.worst_violation >= reduction.details["innerHalfWorst"]


def test_figures_need_solution(tmp_app, run_config):
    run = load_run_config(run_config)
    with pytest.raises(MissingArtifactError):
        figures_function(tmp_app, run)


def test_figures_after_solve(tmp_app, run_config):
    run = load_run_config(run_config)
    solve_function(tmp_app, run)
    written = figures_function(tmp_app, run)
    assert set(written) == {"fig1", "fig2"}
    assert written["fig1"].read_text().splitlines()[0] == "t,y,V_pre,V_post"
    assert written["fig2"].read_text().splitlines()[0] == "t,z,l,m,a"


def test_sweep_figures_without_solution(tmp_app, run_config):
    run = load_run_config(run_config)
    written = figures_function(tmp_app, run, ["fig5", "fig6", "fig7"])
    assert all(path.is_file() for path in written.values())
    assert written["fig7"].read_text().splitlines()[0] == "t,alpha,z,l,l_equal_volatility"


def test_simulate_after_solve(tmp_app, run_config):
    run = load_run_config(run_config)
    solve_function(tmp_app, run)
    result = simulate_function(tmp_app, run)
    assert result.exported_paths == 3
    estimate = json.loads((run.outputs / ESTIMATE_JSON).read_text())
    assert estimate["nPaths"] == 64
    assert estimate["seed"] == 7
    assert estimate["estimate"] == result.estimate.estimate
    lines = (run.outputs / PATHS_CSV).read_text().splitlines()
    assert lines[0] == "path,t,Z,Y,H"
    assert len(lines) == 1 + 3 * 101


def test_simulate_with_celery_backend(tmp_app, run_config):
    run = load_run_config(run_config, default_stride=10)
    solve_function(tmp_app, run)
    local = simulate_function(tmp_app, run)
    tmp_app.config["SIMULATION_BACKEND"] = "celery"
    with tmp_app.app_context():
        distributed = simulate_function(tmp_app, run)
    assert distributed.estimate.estimate == pytest.approx(local.estimate.estimate, rel=1e-12)
    assert distributed.estimate.stderr == pytest.approx(local.estimate.stderr, rel=1e-9)


def test_quick_verify(tmp_app, run_config):
    tmp_app.config["QUICK_GRID"] = {"N": 81, "Mt": 1601}
    run = load_run_config(run_config)
    report = verify_function(tmp_app, run, quick=True)
    outputs = run.outputs / QUICK_OUTPUTS
    saved = json.loads((outputs / VERIFY_JSON).read_text())
    assert saved["passed"] == report.passed
    assert set(saved["checks"]) == {
        "cfl",
        "quadratureOracle",
        "feynmanKac",
        "gridConvergence",
        "sandwich",
        "closedFormShift",
        "reduction",
        "bondBounds",
        "expectedUtility",
        "tournament",
        "monotonicity",
        "kappa",
        "determinism",
    }
    gating = {name for name, check in report.checks.items() if check.gating}
    assert gating == set(report.checks) - {"closedFormShift", "reduction"}
    for name in gating:
        assert report.checks[name].passed, (name, report.checks[name])
    assert report.passed
    assert saved["checks"]["expectedUtility"]["tolerance"] == pytest.approx(
        3.0 * saved["checks"]["expectedUtility"]["estimate"]["stderr"]
    )

    second = verify_function(tmp_app, run, quick=True)
    assert second.checks["artifacts"].passed
    assert second.checks["determinism"].passed
    assert second.checks["determinism"].details["comparedWithPreviousRun"]
    assert second.passed


def test_verify_detects_modified_artifacts(tmp_app, run_config):
    run = load_run_config(run_config)
    verify_function(tmp_app, run, quick=True)
    field = run.outputs / QUICK_OUTPUTS / XI_POST_CSV
    field.write_text(field.read_text().replace("t,z,value", "t,z,value\n", 1))
    report = verify_function(tmp_app, run, quick=True)
    assert not report.checks["artifacts"].passed
    assert not report.passed
    assert report.checks["artifacts"].details["mismatches"] == {XI_POST_CSV: "checksum mismatch"}


def test_cli_solve(cli_runner, config_file, run_config):
    result = cli_runner.invoke(args=["solve", "--config", str(config_file)])
    assert result.exit_code == 0, result.output
    assert "sandwich: ok" in result.output
    assert (Path(run_config["outputs"]) / MANIFEST_JSON).is_file()


def test_cli_pipeline(cli_runner, config_file, run_config):
    assert cli_runner.invoke(args=["solve", "--config", str(config_file)]).exit_code == 0
    figures = cli_runner.invoke(
        args=["figures", "--config", str(config_file), "--which", "fig1,fig5"]
    )
    assert figures.exit_code == 0, figures.output
    assert "fig1:" in figures.output
    simulate = cli_runner.invoke(args=["simulate", "--config", str(config_file)])
    assert simulate.exit_code == 0, simulate.output
    assert '"nPaths": 64' in simulate.output
    outputs = Path(run_config["outputs"])
    assert (outputs / "fig1.csv").is_file()
    assert (outputs / "fig5.csv").is_file()
    assert not (outputs / "fig2.csv").exists()


def test_cli_missing_solution(cli_runner, config_file):
    result = cli_runner.invoke(args=["simulate", "--config", str(config_file)])
    assert result.exit_code == 1
    assert "MissingArtifactError" in result.output


def test_cli_invalid_config(cli_runner, run_config, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({**run_config, "grid": {"d": 2.0, "Mt": 401}}))
    result = cli_runner.invoke(args=["solve", "--config", str(path)])
    assert result.exit_code == 1
    assert "grid.N" in result.output


def test_cli_unknown_figure_choice(cli_runner, config_file):
    result = cli_runner.invoke(args=["figures", "--config", str(config_file), "--which", "fig9"])
    assert result.exit_code == 2


def test_parse_figures():
    assert parse_figures(("fig1,fig2", "fig7")) == ["fig1", "fig2", "fig7"]
    assert parse_figures(()) is None


@pytest.mark.slow
def test_example1_expected_utility_within_three_standard_errors(tmp_app, tmp_path):
    config = json.loads((Path(__file__).parent.parent / "configs" / "example1.json").read_text())
    config["outputs"] = str(tmp_path / "example1")
    run = load_run_config(config, default_stride=100, default_block_size=1024)
    assert run.require_sim().config.n_paths == 100_000
    solved = solve_function(tmp_app, run)
    vf = ValueFunction(run.model, solved.xi_post, solved.pre.xi)
    verification, _ = _verification_checks(tmp_app, run, vf)
    assert verification.tolerance == pytest.approx(3.0 * verification.details["estimate"]["stderr"])
    assert verification.passed, verification
