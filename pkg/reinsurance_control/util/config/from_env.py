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

from os import environ

from flask.config import Config

SIMULATION_BACKENDS = ("local", "celery")


def load_config_from_env(config: Config):
    _load_celery_config_from_env(config)
    _load_simulation_config_from_env(config)
    _load_solver_config_from_env(config)


def _load_celery_config_from_env(config: Config):
    if "BROKER_URL" in environ:
        celery_conf = config.get("CELERY", {})
        celery_conf["broker_url"] = environ["BROKER_URL"]
        config["CELERY"] = celery_conf

    if "RESULT_BACKEND" in environ:
        celery_conf = config.get("CELERY", {})
        celery_conf["result_backend"] = environ["RESULT_BACKEND"]
        config["CELERY"] = celery_conf

    if "CELERY_QUEUE" in environ:
        celery_conf = config.get("CELERY", {})
        celery_conf["task_default_queue"] = environ["CELERY_QUEUE"]
        config["CELERY"] = celery_conf


def _load_simulation_config_from_env(config: Config):
    if "SIMULATION_BACKEND" in environ:
        backend = environ["SIMULATION_BACKEND"].lower()
        if backend not in SIMULATION_BACKENDS:
            raise ValueError(
                f"SIMULATION_BACKEND must be one of {SIMULATION_BACKENDS} (got {backend})!"
            )
        config["SIMULATION_BACKEND"] = backend

    if "SIMULATION_BLOCK_SIZE" in environ:
        size = int(environ["SIMULATION_BLOCK_SIZE"])
        if size < 2 or size % 2:
            raise ValueError(
                f"SIMULATION_BLOCK_SIZE must be an even number of at least 2 (got {size})!"
            )
        config["SIMULATION_BLOCK_SIZE"] = size


def _load_solver_config_from_env(config: Config):
    if "DEFAULT_KAPPA" in environ:
        kappa = float(environ["DEFAULT_KAPPA"])
        if not kappa > 0:
            raise ValueError(f"DEFAULT_KAPPA must be positive (got {kappa})!")
        config["DEFAULT_KAPPA"] = kappa

    if "STORAGE_STRIDE" in environ:
        stride = int(environ["STORAGE_STRIDE"])
        if stride < 1:
            raise ValueError(f"STORAGE_STRIDE may not be smaller than 1 (got {stride})!")
        config["STORAGE_STRIDE"] = stride
