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

"""Invoke tasks for the reinsurance control pipeline (``poetry run invoke --list``)."""

from os import environ
from os import execvpe as replace_process
from pathlib import Path
from platform import system
from typing import List, Optional, cast

from dotenv import load_dotenv, set_key
from invoke import task
from invoke.context import Context
from invoke.runners import Result

if system() == "Windows":
    from subprocess import list2cmdline as join
else:
    from shlex import join

load_dotenv(".flaskenv")
load_dotenv(".env")

MODULE_NAME = "reinsurance_control"
CELERY_WORKER = f"{MODULE_NAME}.celery_worker:CELERY"
DEFAULT_CONFIG = str(Path("configs") / "example1.json")
EXAMPLE_CONFIGS = sorted(str(p) for p in Path("configs").glob("example*.json"))


def _flask(command: List[str]) -> str:
    return join(["python", "-m", "flask", "--app", MODULE_NAME, *command])


def _docker() -> str:
    return environ.get("DOCKER_CMD", "docker")


@task
def start_broker(c, port: Optional[str] = None):
    """Start the redis broker for the celery simulation backend.

    The container id is kept as REDIS_CONTAINER_ID in the .env file and
    reused on the next start. Set DOCKER_CMD to "podman" to use podman.
    """
    c = cast(Context, c)
    container_id = environ.get("REDIS_CONTAINER_ID")
    if container_id:
        res: Result = c.run(join([_docker(), "restart", container_id]), echo=True, warn=True)
        if not res.failed:
            return
        print(f"Could not restart container {container_id}, starting a new one.")

    port = port or environ.get("REDIS_PORT", "6379")
    result: Result = c.run(join([_docker(), "run", "-d", "-p", f"{port}:6379", "redis"]), echo=True)
    dot_env_path = Path(".env")
    dot_env_path.touch(exist_ok=True)
    set_key(dot_env_path, "REDIS_CONTAINER_ID", result.stdout.strip())


@task
def stop_broker(c):
    """Stop the redis broker started with ``start-broker``."""
    c = cast(Context, c)
    container_id = environ.get("REDIS_CONTAINER_ID", "--latest")
    c.run(join([_docker(), "stop", container_id]), warn=True)


@task
def worker(c, concurrency=1, log_level="INFO", watch=False):
    """Run a celery worker that simulates path blocks.

    The simulate and verify commands send their blocks to the workers when
    SIMULATION_BACKEND=celery is set for them. Each worker process holds one
    block at a time, use ``--concurrency`` for more processes. With ``--watch``
    the worker restarts on source changes.
    """
    cmd = [
        "celery",
        "--app",
        CELERY_WORKER,
        "worker",
        "--pool=prefork" if int(concurrency) > 1 else "--pool=solo",
        "--concurrency",
        str(concurrency),
        "--loglevel",
        log_level.upper(),
    ]
    if watch:
        cmd = [
            "watchmedo",
            "auto-restart",
            f"--directory=./{MODULE_NAME}",
            "--pattern=*.py",
            "--recursive",
            "--",
        ] + cmd
    print(join(cmd))
    replace_process(cmd[0], cmd, environ)


@task
def solve(c, config=DEFAULT_CONFIG):
    """Solve both problems of a run configuration."""
    c.run(_flask(["solve", "--config", config]), echo=True)


@task
def figures(c, config=DEFAULT_CONFIG, which=""):
    """Write the figure tables of a solved run (``--which fig1,fig2`` to select)."""
    command = ["figures", "--config", config]
    if which:
        command += ["--which", which]
    c.run(_flask(command), echo=True)


@task
def simulate(c, config=DEFAULT_CONFIG, celery=False):
    """Estimate the expected utility of the optimal strategy of a solved run."""
    env = {"SIMULATION_BACKEND": "celery"} if celery else {}
    c.run(_flask(["simulate", "--config", config]), echo=True, env=env)


@task
def verify(c, config=DEFAULT_CONFIG, quick=False):
    """Run the acceptance suite for a run configuration."""
    command = ["verify", "--config", config]
    if quick:
        command.append("--quick")
    c.run(_flask(command), echo=True)


@task
def examples(c, quick=False):
    """Solve, write the figures and verify every example configuration."""
    for config in EXAMPLE_CONFIGS:
        solve(c, config)
        figures(c, config)
        verify(c, config, quick)


@task
def lint(c):
    """Check formatting with black and run flake8."""
    c.run(join(["black", "--check", MODULE_NAME, "tests", "tasks.py"]), echo=True, warn=True)
    c.run(join(["flake8", MODULE_NAME, "tests"]), echo=True, warn=True)


@task
def test(c, slow=False):
    """Run the test suite (``--slow`` includes the long running tests)."""
    cmd = ["python", "-m", "pytest"]
    if not slow:
        cmd += ["-m", "not slow"]
    c.run(join(cmd), echo=True)
