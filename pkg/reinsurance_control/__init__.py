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

"""Root module containing the flask app factory of the reinsurance control pipeline."""

from json import load as load_json
from logging import WARNING, Formatter, Handler, getLogger
from logging.config import dictConfig
from os import environ, makedirs
from pathlib import Path
from typing import Any, Dict, Optional, cast

import click
from flask.app import Flask
from flask.cli import FlaskGroup
from flask.config import Config
from flask.logging import default_handler
from tomli import load as load_toml

from . import celery, runs
from .util.config import DebugConfig, ProductionConfig
from .util.config.from_env import SIMULATION_BACKENDS, load_config_from_env

# the app name doubles as the prefix of the settings env var, no spaces allowed
APP_NAME = __name__
CONFIG_ENV_VAR_PREFIX = APP_NAME.upper().replace("-", "_").replace(" ", "_")

POSITIVE_SETTINGS = (
    "DEFAULT_KAPPA",
    "CFL_WARN_RATIO",
    "SANDWICH_TOLERANCE",
    "REDUCTION_TOLERANCE",
    "GRID_CONVERGENCE_TOLERANCE",
    "KAPPA_TOLERANCE",
    "MONOTONICITY_TOLERANCE",
    "MC_STANDARD_ERRORS",
    "MC_DISCRETIZATION_ALLOWANCE",
)


def _instance_path() -> Optional[str]:
    instance_path = environ.get("INSTANCE_PATH", None)
    if instance_path and Path(instance_path).is_file():
        return None
    return instance_path


def _load_config(config: Config, test_config: Optional[Dict[str, Any]]):
    """Defaults first, then instance files and env vars (or the test config)."""
    debug = (
        config.get("DEBUG", False)
        or environ.get("FLASK_ENV", "production").lower() == "development"
    )
    config.from_object(DebugConfig if debug else ProductionConfig)

    if test_config is not None:
        config.from_mapping(test_config)
        return

    config.from_pyfile("config.py", silent=True)
    config.from_file("config.json", load=load_json, silent=True)
    config.from_file("config.toml", load=load_toml, silent=True)
    config.from_envvar(f"{CONFIG_ENV_VAR_PREFIX}_SETTINGS", silent=True)
    load_config_from_env(config)


def _check_config(config: Config):
    """Reject settings the pipelines cannot work with before any command runs."""
    for key in POSITIVE_SETTINGS:
        if not float(config[key]) > 0:
            raise ValueError(f"{key} must be positive (got {config[key]})!")
    if config["SIMULATION_BACKEND"] not in SIMULATION_BACKENDS:
        raise ValueError(
            f"SIMULATION_BACKEND must be one of {SIMULATION_BACKENDS} (got {config['SIMULATION_BACKEND']})!"
        )
    quick = config["QUICK_GRID"]
    if set(quick) != {"N", "Mt"}:
        raise ValueError(f"QUICK_GRID needs exactly the keys 'N' and 'Mt' (got {sorted(quick)})!")


def _configure_logging(app: Flask):
    config = app.config
    log_config = cast(Optional[Dict[Any, Any]], config.get("LOG_CONFIG"))
    if log_config:
        dictConfig(log_config)
        return

    log_format = cast(Optional[str], config.get("DEFAULT_LOG_FORMAT"))
    if not log_format:
        return
    log_severity = max(0, config.get("DEFAULT_LOG_SEVERITY", WARNING))
    formatter = Formatter(
        log_format,
        style=cast(str, config.get("DEFAULT_LOG_FORMAT_STYLE", "%")),
        datefmt=cast(Optional[str], config.get("DEFAULT_LOG_DATE_FORMAT")),
    )
    handler = cast(Handler, default_handler)
    handler.setFormatter(formatter)
    handler.setLevel(log_severity)
    # module loggers of the library propagate to the root logger
    root = getLogger()
    root.addHandler(handler)
    root.setLevel(min(root.level, log_severity))
    app.logger.removeHandler(handler)


def create_app(test_config: Optional[Dict[str, Any]] = None) -> Flask:
    """Flask app factory.

    Config sources in load order: ``ProductionConfig``/``DebugConfig``, the
    instance files ``config.py``, ``config.json`` and ``config.toml``, the file
    named by ``REINSURANCE_CONTROL_SETTINGS`` and the env vars read by
    :func:`load_config_from_env`. A ``test_config`` replaces everything after
    the defaults.
    """
    app = Flask(APP_NAME, instance_relative_config=True, instance_path=_instance_path())

    _load_config(app.config, test_config)
    _check_config(app.config)
    _configure_logging(app)

    app.logger.info(
        f"Configuration loaded (kappa={app.config['DEFAULT_KAPPA']}, "
        f"stride={app.config['STORAGE_STRIDE']}, simulation backend "
        f"'{app.config['SIMULATION_BACKEND']}'). Possible config locations are: "
        f"'config.py', 'config.json', 'config.toml', Environment: '{CONFIG_ENV_VAR_PREFIX}_SETTINGS'"
    )

    try:
        makedirs(app.instance_path, exist_ok=True)
    except OSError:
        pass

    celery.register_celery(app)
    runs.register_runs(app)

    return app


@click.group(cls=FlaskGroup, create_app=create_app)
def cli():
    """Command line entry point of the reinsurance control pipeline."""
    pass
