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

"""Worker entry point, start with ``celery --app reinsurance_control.celery_worker:CELERY worker``.

Importing this module creates an app instance to configure celery. DO NOT IMPORT NORMALLY!
"""

from . import create_app
from .celery import CELERY  # noqa

WORKER_APP = create_app()
WORKER_APP.logger.info(
    f"Worker for '{CELERY.conf.task_default_queue}' using the "
    f"'{WORKER_APP.config['SIMULATION_BACKEND']}' simulation backend config."
)
