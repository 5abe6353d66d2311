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

"""Module containing default config values."""

from logging import INFO, WARNING

from .celery_config import CELERY_DEBUG_CONFIG, CELERY_PRODUCTION_CONFIG


class ProductionConfig:
    DEBUG = False
    TESTING = False

    JSON = {
        "sort_keys": True,
        "compact": True,
    }

    LOG_CONFIG = None  # if set this is preferred

    DEFAULT_LOG_SEVERITY = WARNING
    DEFAULT_LOG_FORMAT_STYLE = "{"
    DEFAULT_LOG_FORMAT = "{asctime} [{levelname:^7}] [{module:<30}] {message}    <{funcName}, {lineno}; {pathname}>"
    DEFAULT_LOG_DATE_FORMAT = None

    CELERY = CELERY_PRODUCTION_CONFIG

    # finite difference solvers
    DEFAULT_KAPPA = 1e3
    STORAGE_STRIDE = 100
    CFL_WARN_RATIO = 0.5
    SATURATION_WARN_FRACTION = 0.01

    # acceptance checks
    SANDWICH_TOLERANCE = 1e-3
    REDUCTION_TOLERANCE = 1e-6  # reported only
    GRID_CONVERGENCE_TOLERANCE = 5e-3  # relative change of xi_post(0, 0)
    KAPPA_TOLERANCE = 1e-8
    MONOTONICITY_TOLERANCE = 1e-6
    MC_STANDARD_ERRORS = 3.0
    MC_DISCRETIZATION_ALLOWANCE = 5e-3

    # monte carlo
    SIMULATION_BACKEND = "local"  # or "celery"
    SIMULATION_BLOCK_SIZE = 1024
    SIMULATION_TIMEOUT = 60 * 60  # 1 hour

    QUICK_GRID = {"N": 101, "Mt": 5001}


class DebugConfig(ProductionConfig):
    ENV = "development"
    DEBUG = True

    DEFAULT_LOG_SEVERITY = INFO

    JSON = {
        "sort_keys": True,
        "compact": False,
    }

    CELERY = CELERY_DEBUG_CONFIG
